"""
Central configuration for the diameter-two lab.
All constants defined here to avoid magic numbers scattered throughout code.
This single file is the source of truth for caps, construction defaults,
certificate parameters and the CLI/report surface.
"""

from fractions import Fraction

# ============ ARITHMETIC CONSTANTS ============
# Bisection depth used when a rational bracket around a real root is needed
# (sup of a functional over a p-product ball). 2^-64 relative width is far
# below any slice depth used in practice.
ROOT_BRACKET_BITS = 64

# ============ POLYTOPE CAPS ============
# Candidate sums enumerated per Minkowski accumulation step.
# Above this the engine raises CapExceededError("cap_sums").
MAX_CANDIDATE_SUMS = 200_000

# Product of part vertex counts above which a combination diameter in a
# non-enumerable-dual norm (gauge of B_eps) is not materialised; the
# sum-of-diameters upper bound is reported instead, flagged inexact.
EXACT_COMBO_CAP = 2_500

# Vertex count above which a body is considered out of desk scale.
# build_B_eps for N = 4 trips this on purpose (2^11 box corners).
MAX_VERTICES = 1_000

# Barycentric grid size above which greedy_net refuses to run.
MAX_GRID_POINTS = 50_000

# Number of deterministic directions tried before falling back to the
# membership LP while pruning. Unique maximisers are extreme for free.
PRUNE_SAMPLE_DIRECTIONS = 24

# ============ CONSTRUCTION DEFAULTS ============
# Size of the stage-2 net, "choose l2 > 1".
DEFAULT_L2 = 3

# Denominator q of the barycentric grid used to certify nets.
DEFAULT_MESH_DENOMINATOR = 4

# Largest stage the CLI builds without an explicit override.
MAX_STAGES = 4

# ============ RENORMING DEFAULTS ============
DEFAULT_EPS = Fraction(1, 4)
DEFAULT_GAMMA = Fraction(1, 8)

# Slice depth for the base slices of the combination theorem. Their average
# sup-diameter is 2*alpha, which must stay below (1 - eps) * gamma / 4.
THM_SLICE_ALPHA = Fraction(1, 128)

# Safety factor applied to every upper limit when solving for rho.
RENORM_SLACK = Fraction(1, 2)

# Weights tried by the open-set witness search: z = lam*(2g - 1) + (1 - lam)*box.
WITNESS_LAMBDAS = (Fraction(1), Fraction(3, 4), Fraction(1, 2), Fraction(1, 4))

# ============ CERTIFICATE DEFAULTS ============
DEFAULT_EPS_PRIME = Fraction(1, 100)

# Default slice depth for the k0 small-combination measurement.
DEFAULT_COMBO_ALPHA = Fraction(1, 8)

# Grid resolution for the (s, t) witness search on the p-product sphere.
# Doubled up to MAX_SPHERE_GRID if the first grid misses the slice.
SPHERE_GRID = 64
MAX_SPHERE_GRID = 4096

# Seeded random convex combinations sampled per co(A U -A U B) instance.
LEMMA24_RANDOM_SAMPLES = 4

# ============ RANDOM SUITE DEFAULTS ============
DEFAULT_SEED = 20240607
MAX_RANDOM_SLICES = 4
MAX_RANDOM_DIM = 4
# Coefficients of random functionals are drawn from [-COEFF_RANGE, COEFF_RANGE].
COEFF_RANGE = 3

# ============ CLI / REPORT CONSTANTS ============
# Exit codes per the driver contract.
EXIT_PASS = 0
EXIT_CERT_FAIL = 1
EXIT_SPEC_ERROR = 2
EXIT_CAP_EXCEEDED = 3

REPORT_JSON_NAME = "report.json"
REPORT_CSV_NAME = "summary.csv"

# Fixed CSV columns. bound_approx is a decimal rendering of bound and is
# never used for decisions.
CSV_COLUMNS = ("experiment", "kind", "N", "parameters", "bound", "bound_approx", "verdict")

# Digits kept in approximate decimal renderings.
APPROX_DIGITS = 6
