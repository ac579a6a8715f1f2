"""
Services package for the quantum-measure toolkit commands.
"""
