"""Exact workbench for mixed-complex operads, graph and tree operads and
their actions on polyvector fields and multidifferential operators."""

__version__ = "0.1.0"
