"""
Enforcement tests for project-wide code standards.

These tests enforce rules that every module must follow:
- No emoji characters in code or run files
- Sphinx-style docstrings throughout
"""
