"""Setup script for target-ledger."""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="target-ledger",
    version="1.0.0",
    author="Target Ledger Team",
    description="TARGET balance netting, reconstruction and strategem simulations",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.9",
    ],
    extras_require={
        "dev": ["pytest>=7.0.0", "hypothesis>=6.0"],
    },
    entry_points={
        "console_scripts": [
            "target-ledger=target_ledger.cli:main",
        ],
    },
)
