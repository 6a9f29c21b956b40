import os

from dotenv import load_dotenv

dotenv_path = os.path.join(os.path.dirname(__file__), "..", "..", ".env")
load_dotenv(dotenv_path=dotenv_path)

# --- Numerical Tolerances ---
ANGLE_EPS = float(os.getenv("ORIGON_ANGLE_EPS", 1e-9))  # radians
LENGTH_EPS = float(os.getenv("ORIGON_LENGTH_EPS", 1e-9))  # units of ‖AB‖

# --- Crease Pattern Layout ---
# Outgoing rays are clipped at the construction-point bounding box inflated by this factor
CLIP_INFLATE = float(os.getenv("ORIGON_CLIP_INFLATE", 0.5))
# Coordinates are rounded to this many decimals when ordering vertices
VERTEX_ROUND_DECIMALS = 9

# --- Prism Optimizer ---
GSS_TOL = float(os.getenv("ORIGON_GSS_TOL", 1e-12))
GSS_MAX_ITER = int(os.getenv("ORIGON_GSS_MAX_ITER", 200))
PRISM_SAMPLES = int(os.getenv("ORIGON_PRISM_SAMPLES", 10000))
REPORT_SIGNIFICANT_FIGURES = 4

# --- SVG Style ---
SVG_STROKE_WIDTH = float(os.getenv("ORIGON_SVG_STROKE_WIDTH", 0.01))
SVG_MARGIN = float(os.getenv("ORIGON_SVG_MARGIN", 0.1))
# Pixels per unit length (‖AB‖ = 1 by default)
SVG_SCALE = float(os.getenv("ORIGON_SVG_SCALE", 200.0))
SVG_BOUNDARY_WIDTH_FACTOR = 2.5
SVG_COLORS = {
    "M": "#d62728",
    "V": "#1f77b4",
    "B": "#000000",
    "F": "#aaaaaa",
}
SVG_VALLEY_DASH = "4,2"

# --- Application Settings ---
DEFAULT_ENCODING = "utf-8"
FOLD_FILE_SPEC = 1.1
FOLD_CREATOR = "origon"
FOLD_INDENT = 2
