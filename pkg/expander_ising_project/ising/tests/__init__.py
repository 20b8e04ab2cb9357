# Test suite for ising app
