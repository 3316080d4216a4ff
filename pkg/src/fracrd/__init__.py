"""Closed-form and oracle evaluators for fractional reaction-diffusion equations."""
