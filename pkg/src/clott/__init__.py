"""clott: a workbench for a multi-clocked guarded type theory."""

__version__ = "0.1.0"
