import setuptools

with open("README.md", "r", encoding="UTF8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="UTF8") as fh:
    install_requires = [
        line.strip()
        for line in fh
        if line.strip() and not line.startswith(("#", "pytest", "hypothesis"))
    ]

setuptools.setup(
    name="dropmix",
    version="0.1.0",
    description="exact perfect mixability and mixing-graph synthesis for droplet configurations",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests"]),
    install_requires=install_requires,
    extras_require={"test": ["pytest", "hypothesis"]},
    entry_points={"console_scripts": ["dropmix=dropmix.cli:main"]},
    python_requires=">=3.8",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
