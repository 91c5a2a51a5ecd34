"""Test package for the FD-RIS simulator."""
