"""Small parsimony under the DCJ-indel model over degenerate genomes."""

__version__ = "0.1.0"
