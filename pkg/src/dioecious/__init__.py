"""Two-sex branching particle systems, their mean-field PDEs and survival checks."""
__version__ = "0.1.0"
