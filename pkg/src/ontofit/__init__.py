"""Fitting and finite bases for tuple-generating dependencies and EL-style ontologies."""
