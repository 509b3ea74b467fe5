import setuptools

with open("README.md", "r") as f:
    description = f.read()

setuptools.setup(
    name="twinbeam",
    version="0.3.0",
    description="Estimation errors of two-photon absorbance measured with two-mode squeezed light.",
    long_description=description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "joblib>=1.3",
        "numpy>=1.22",
        "scipy>=1.12",
        'tomli>=1.1; python_version < "3.11"',
    ],
    extras_require={
        "test": ["pytest>=7", "hypothesis>=6"],
    },
    entry_points={
        "console_scripts": ["twinbeam=twinbeam.cli:main"],
    },
    keywords="quantum metrology two-photon absorption squeezed light twin beam photon statistics",
)
