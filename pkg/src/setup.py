from setuptools import setup

with open("README.md", 'r') as f:
    long_description = f.read()

setup(
   name='optopix',
   version='0.0.1',
   description='Optotactile pixel simulation, fitting and scheduling',
   license="BSD 3-clause",
   long_description=long_description,
   packages=['optopix'],  # same as name
   package_data={'optopix': ['presets/*.json']},
   entry_points={'console_scripts': ['optopix=optopix.cli:main']},
)
