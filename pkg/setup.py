from setuptools import find_namespace_packages, setup

setup(
    name="osa-ccucb",
    version="0.1.0",
    description="Cooperative and coordinated UCB1 simulator for opportunistic spectrum access",
    packages=find_namespace_packages(include=["osa.*"]),
    install_requires=[
        "numpy>=1.22",
        "pandas>=1.5",
        "PyYAML>=6.0",
    ],
    extras_require={
        "test": ["pytest>=7"],
    },
    entry_points={
        "console_scripts": ["ccucb=osa.ccucb.__main__:main"],
    },
    python_requires=">=3.9",
)
