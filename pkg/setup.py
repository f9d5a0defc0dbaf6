"""
locapart build/test/release stuff
"""


from os.path import join as pjoin

import locapart

from setuptools import setup


NAME = locapart.__name__

VERSION = locapart.__version__

DESCRIPTION = "Localized subsystem energies for electronic energy transfer"

KEYWORDS = [
    "atoms in molecules",
    "Becke grid",
    "configuration interaction",
    "decoherence",
    "Dexter coupling",
    "electronic energy transfer",
    "energy partitioning",
    "Förster coupling",
    "Gaussian basis",
    "Hartree-Fock",
    "quantum chemistry",
    "quantum dynamics",
    "Slater determinant",
    "subsystem Hamiltonian",
]

with open("README.rst", encoding="utf-8") as fin:
    README = fin.read()

CLASSIFIERS = [
    "Operating System :: OS Independent",
    "Programming Language :: Python",
    "Programming Language :: Python :: 3",
    "Programming Language :: Python :: 3.10",
    "Programming Language :: Python :: 3.11",
    "Programming Language :: Python :: 3.12",
    "Topic :: Scientific/Engineering",
    "Topic :: Scientific/Engineering :: Chemistry",
    "Topic :: Scientific/Engineering :: Physics",
]

LOCAPART_PKGS = [
    "locapart",
    "locapart.chem",
    "locapart.parsing",
    "locapart.transfer",
]

TEST_PKGS = [
    "locapart.test",
    "locapart.chem.test",
    "locapart.parsing.test",
    "locapart.transfer.test",
]

PACKAGES = LOCAPART_PKGS + TEST_PKGS

INSTALL_REQUIRES = [
    "numpy",
    "scipy",
]

SCRIPTS = [
    pjoin("script", "locapart"),
]

setup(
    name=NAME,
    version=VERSION,
    description=DESCRIPTION,
    keywords=KEYWORDS,
    long_description=README,
    classifiers=CLASSIFIERS,
    packages=PACKAGES,
    install_requires=INSTALL_REQUIRES,
    python_requires=">=3.10",
    scripts=SCRIPTS,
)
