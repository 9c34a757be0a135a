"""
Test suite for Conjnorm

This package contains all tests for the Conjnorm project,
organized by module and functionality.
"""
