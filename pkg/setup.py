# Always prefer setuptools over distutils
import re

from setuptools import setup, find_packages
# To use a consistent encoding
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

# read the version from tdzsim/_version.py
version_file_contents = open(path.join(here, 'tdzsim/_version.py'), encoding='utf-8').read()
VERSION = re.compile('__version__ = \"(.*)\"').search(version_file_contents).group(1)

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='tdzsim',

    # Versions should comply with PEP440.
    version=VERSION,

    description='Behavioral simulator of a time-to-digital impedance readout for resistive sensor arrays',
    long_description=long_description,
    long_description_content_type="text/markdown",

    license='Apache License 2.0',

    classifiers=[
        'Development Status :: 3 - Alpha',

        'Intended Audience :: Developers',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering',
        'Topic :: Scientific/Engineering :: Electronic Design Automation (EDA)',

        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
    ],

    keywords='impedance-measurement time-to-digital sensor-array crossbar simulation',

    packages=find_packages(exclude=['tests', 'examples']),

    # List run-time dependencies here.  These will be installed by pip when
    # your project is installed.
    install_requires=['numpy>=1.20', 'scipy', 'tqdm', 'joblib'],

    # List required Python versions
    python_requires='>=3.7',

    # $ pip install -e .[test]
    extras_require={
        'test': ['pytest', 'coverage'],
    },

    package_data={
    },

    data_files=[],

    # To provide executable scripts, use entry points in preference to the
    # "scripts" keyword.
    entry_points={
        'console_scripts': [
            'tdzsim=tdzsim.models.simcli:main',
        ],
    },
)
