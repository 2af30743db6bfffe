"""Numerical defaults shared across the package."""

# equation residual tolerances
TOL_FINITE = 1e-12
TOL_TORUS = 1e-9

# largest finite group that will be materialized element by element
MAX_FINITE_ORDER = 256

# torus runs
DEFAULT_WINDOW = 12
DEFAULT_GRID = 64
MAX_DAMPING = 64

# |charfn| at or below this counts as vanishing when taking logarithms
VANISHING = 1e-12

# ceiling on (u, v) pairs scanned on torus windows before subsampling
MAX_PAIRS = 1_000_000
