"""Application constants and configuration."""

# Units
ANGSTROM_TO_BOHR = 1.8897261254578281

# Default directories
DEFAULT_FIXTURES_DIR = "data/fixtures"

# Wavefunction input
OCCUPATION_TOLERANCE = 1e-6  # Allowed |sum(occupations) - declared electrons|
MAX_PRIMITIVE_TYPE = 20  # Cartesian f is the highest supported shell
WFX_SIGNIFICANT_DIGITS = 16

# Grid Configuration
DEFAULT_RADIAL_POINTS = 128
DEFAULT_ANGULAR_POINTS = 302
MIN_RADIAL_POINTS = 8
BECKE_ITERATIONS = 3
SIZE_ADJUSTMENT_LIMIT = 0.5
SUPPORTED_LEBEDEV_ORDERS = (6, 26, 50, 110, 194, 302)

# Bragg-Slater radii in angstrom, H through Kr
BRAGG_RADII_ANGSTROM = {
    "H": 0.35, "He": 0.35,
    "Li": 1.45, "Be": 1.05, "B": 0.85, "C": 0.70, "N": 0.65, "O": 0.60, "F": 0.50, "Ne": 0.45,
    "Na": 1.80, "Mg": 1.50, "Al": 1.25, "Si": 1.10, "P": 1.00, "S": 1.00, "Cl": 1.00, "Ar": 1.00,
    "K": 2.20, "Ca": 1.80,
    "Sc": 1.60, "Ti": 1.40, "V": 1.35, "Cr": 1.40, "Mn": 1.40,
    "Fe": 1.40, "Co": 1.35, "Ni": 1.35, "Cu": 1.35, "Zn": 1.35,
    "Ga": 1.30, "Ge": 1.25, "As": 1.15, "Se": 1.15, "Br": 1.15, "Kr": 1.15,
}

ELEMENT_SYMBOLS = (
    "H", "He",
    "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar",
    "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr",
)

# Field evaluation
NEGLIGIBLE_DENSITY = 1e-12  # Points below this spin density are skipped
PAIR_SCREENING_THRESHOLD = 1e-12  # Gaussian-product prefactor cutoff
PAIR_EXTENT_THRESHOLD = 1e-14  # Orbital-weight product cutoff per point
POINT_CHUNK_SIZE = 2048  # Fixed batch size, independent of thread count
MAX_BOYS_ORDER = 24

# Hole solver
BRACKET_EPSILON = 1e-10
BRACKET_SPAN = 500.0
ROOT_TOLERANCE = 1e-12
MAX_ROOT_ITERATIONS = 200
FLAT_CURVATURE = 1e-14  # |Q| below this uses the x -> 2 limit
DEGRADED_FALLBACK_FRACTION = 0.01

# Diagnostics thresholds
T1_THRESHOLDS = {"organic": 0.02, "3d": 0.05, "4d": 0.045}
D1_THRESHOLDS = {"3d": 0.15, "4d": 0.12}
PERCENT_TAE_BANDS = (5.0, 10.0)
A_LAMBDA_BANDS = (0.10, 0.225, 0.50)
ELEMENT_CLASSES = ("organic", "3d", "4d")

# Exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGRADED = 2
EXIT_USAGE = 64

# File I/O Configuration
REPORT_PRECISION = 6  # Decimal places in text and CSV reports
CORRELATION_PRECISION = 3  # Decimal places for correlations in percent
OUTPUT_FORMATS = ("json", "csv", "text")
