#
#
#

from setuptools import find_packages, setup

try:
    with open("README.md", "r", encoding="UTF-8") as f:
        long_description: str = f.read()
except FileNotFoundError:
    long_description = ""

setup(
    name="microsar",
    version="1.0.0",
    description=(
        "Incremental software-architecture reconstruction and change-conflict "
        "detection for microservice systems"
    ),
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="microsar developers",
    classifiers=[
        "Programming Language :: Python :: 3.10",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    install_requires=[
        "networkx >=3.0",
        "pandas >=1.5.0",
        "PyYAML >=5.4.1",
        "tqdm >=4.64.0",
        "tree-sitter >=0.23",
        "tree-sitter-java >=0.23",
    ],
    extras_require={"test": ["pytest >=7.0"]},
    entry_points={"console_scripts": ["microsar = microsar.__main__:main"]},
    include_package_data=True,
    package_data={"microsar": ["data/*.yaml", "data/rules/*.yaml"]},
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    python_requires=">=3.10",
)
