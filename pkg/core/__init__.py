"""
Core module for HyperHOM
Contains the experiment engine, the optics sub-package and the oracle
"""
