"""Finite characterisations of description-logic concepts."""
