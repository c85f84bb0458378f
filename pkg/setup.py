from setuptools import setup, find_packages

setup(
    name="calibrationlab",
    version="0.0.1",
    author="j.zhou",
    packages=find_packages(exclude=("tests",)),
    install_requires=[
        "torch>=2.0.1",
        "einops>=0.3.2",
        "tqdm",
        "numpy",
        "networkx",
        "shapely>=2.0",
        "matplotlib",
    ],
    entry_points={
        "console_scripts": ["calibrationlab=calibrationlab.cli:main"],
    },
)
