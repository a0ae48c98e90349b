"""Multiplicative Hermite/Laguerre polynomials, finite free convolution and limit laws."""
