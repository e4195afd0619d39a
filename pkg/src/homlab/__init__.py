"""Reusability-restricted decompositions, games, homomorphism counts and comonads on small graphs."""
