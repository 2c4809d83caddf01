from setuptools import setup, find_packages

setup(
    name="splinet",
    version="0.1",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"splinet": ["schema/*.json"]},
    description="Continuous-depth neural networks with B-spline parameterized controls",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    keywords=['neural ode', 'b-spline', 'adjoint', 'resnet'],

    python_requires='>=3.10',
    install_requires=[
            'numpy>=1.26.0',
            'scipy>=1.14.0',
            'pandas>=2.0.0',
            'scikit-learn>=1.6.0',
            'joblib>=1.4.0',
            'tqdm==4.67.1',
        ],
    extras_require={
        'test': ['pytest>=8.0', 'hypothesis>=6.100'],
    },
    entry_points={
        'console_scripts': ['splinet=splinet.cli:main'],
    },
)
