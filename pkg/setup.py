from pathlib import Path

from setuptools import find_packages, setup


long_description = (Path(__file__).parent / 'README.md').read_text()


dependencies = (
    'click >= 8.2',
    'confidence',
    'more-itertools',
    'numpy',
    'tqdm',
)


setup(
    name='appease',
    version='0.1.0',
    description='Single-CPU scheduling simulator for request latency under competing load',
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=('tests', 'tests.*')),
    package_data={'appease': ['resources/*.yaml']},
    install_requires=dependencies,
    entry_points={
        'console_scripts': ['appease=appease.__main__:cli'],
    },
)
