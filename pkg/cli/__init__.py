"""
CLI module for HyperHOM
"""
