from setuptools import setup, find_packages

MAJOR = 0
MINOR = 1
PATCH = 0
VERSION = '%d.%d.%d' % (MAJOR, MINOR, PATCH)


def setup_package():
    """Perform the setup for densfield"""
    packages = find_packages(exclude=['examples', 'examples.*'])

    metadata = dict(
        name="densfield",
        author="QCoding",
        author_email='quats111@gmail.com',
        license='MIT',
        version=VERSION,
        packages=packages,
        url="https://github.com/QCoding/densfield",
        # in pkg-info this maps to 'summary'
        description="Density Field Scene Completion",
        # in pkg-info this maps to 'description'
        long_description="Self supervised multi view density fields for desk scale scenes, distilled in to a "
                         "single view predictor",
        python_requires='>=3.8',
        keywords="density-field volume-rendering occupancy distillation",
        install_requires=[
            "numpy>=1.17",
            "numba>=0.50",
        ],
        tests_require=['pytest'],
        zip_safe=False,
        platforms="any",
        entry_points={
            "console_scripts": [
                "densfield=densfield.cli.main:main",
            ]
        },
        extras_require={
            "test": [
                "pytest>=4.4.0",
                "pytest-cov",
                "pytest-mypy",
                "pytest-pylint",
                "pytest-repeat",
                "pytest-xdist",
            ]
        },
        classifiers=[
            "Development Status :: 3 - Alpha",
            "Operating System :: OS Independent",
            "Programming Language :: Python",
            "Programming Language :: Python :: 3",
            "Programming Language :: Python :: 3.8",
            "Programming Language :: Python :: 3.9",
            "Topic :: Scientific/Engineering",
        ]
    )

    setup(**metadata)


if __name__ == "__main__":
    setup_package()
