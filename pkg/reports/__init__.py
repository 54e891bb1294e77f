"""
Reports module for HyperHOM
"""
