"""Finite-fan combinatorics at desk scale.

Fans, chain expansions, the epimorphism calculus, finite Stone duality,
amalgamation and generic inverse sequences, bounded-value vector
semigroups with tetris operations, partition pigeonhole searches, the
fan-coloring pipeline, and chain-merging metrics, all with brute-force
oracles and serializable certificates.
"""

__version__ = "0.1.0"
