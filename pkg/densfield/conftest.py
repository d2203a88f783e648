"""Test-collection wiring: keep doctest output stable across NumPy versions."""
import numpy as np

# NumPy 2 prints scalars as ``np.True_`` / ``np.float64(...)``; doctests were
# written against the classic repr.
if int(np.__version__.split('.')[0]) >= 2:
    np.set_printoptions(legacy='1.25')
