"""Setup script for backwards compatibility."""
from setuptools import setup

if __name__ == "__main__":
    setup()

