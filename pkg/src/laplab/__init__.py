"""Laplace approximations to normalizing constants and their relative error."""
