"""Hot loops, each with a numba implementation and a numpy fallback."""
