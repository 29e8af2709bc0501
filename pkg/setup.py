from setuptools import setup

__author__ = "The fastswitch developers"
__copyright__ = "Copyright 2024"
__license__ = "MIT"
__version__ = "0.1.0"
__status__ = "Beta"
__description__ = "Dual-mode (fast/slow) visual agent orchestration"


def requirements():
    with open('requirements.txt') as f:
        return [line.rstrip() for line in f if line.strip()]


# use README.rst as long description
def readme():
    with open('README.rst') as f:
        return f.read()


def setup_fastswitch():

    setup(

        name="fastswitch",
        packages=[
            'fastswitch',
            'fastswitch.adapters',
            'fastswitch.analysis',
            'fastswitch.core',
            'fastswitch.data',
            'fastswitch.metrics',
            'fastswitch.pipeline',
            'fastswitch.utils',
            ],

        # metadata
        version=__version__,
        author=__author__,
        platforms = 'Any',
        description = __description__,
        long_description = readme(),
        keywords = ['Visual Question Answering', 'Multimodal Agents', 'Segmentation'],
        classifiers = [],
        python_requires = '>=3.7',
        install_requires = requirements(),
        extras_require = {'test': ['pytest']},

        # set up package contents

        package_data = {'fastswitch.data': ['templates/*.json']},
        entry_points = {'console_scripts': ['fastswitch = fastswitch.cli:main']},
)


if __name__ == '__main__':

    setup_fastswitch()
