import os

# --- Design energy ---
# Lagrange parameter for the composition penalty. Kept as strings so they
# convert to exact fractions (1.1 -> 11/10).
LAMBDA_QPU = "1.1"
LAMBDA_DESIGN = "2.5"

# --- Enumeration limits ---
STRUCTURE_LIMIT = 16
DESIGNABILITY_LIMIT = 14
SPECTRUM_LIMIT = 24
COMPONENT_LIMIT = 24
SA_LIMIT = 64

# --- Schrodinger simulation ---
STATE_LIMIT = 20
DEFAULT_EPS = 0.01
DEFAULT_TF = 20.0
CG_TOL = 1e-10
J_MAX = 1.0
DRIVER_SIGN = 1
# Step-size ladder for the chi diagnostic. The finest rungs are where chi
# settles near 1/4 for anneals as long as t_f = 50.
CHI_EPS_LIST = "0.4,0.2,0.1,0.05,0.025,0.0125,0.00625,0.003125"

# --- Control noise ---
NOISE_X = 0.015
NOISE_SAMPLES = 10_000
TIE_TOL = 1e-12

# --- Simulated annealing ---
SA_RESTARTS = 10
SA_STEPS = 100_000
SA_T_START = 2.0
SA_T_END = 0.02

# --- Runs ---
DEFAULT_SEED = 2024
SEED_ENV_VAR = "HPDESIGN_SEED"
DEFAULT_THREADS = 1

# Pure-QPU benchmark systems: (N, N_H, J_cs). Chains of k=2 physical qubits
# for N=10, k=3 for everything else.
QPU_BENCHMARK_SYSTEMS = [
    (10, 4, 2.25),
    (11, 5, 2.25),
    (12, 4, 2.25),
    (12, 6, 2.75),
    (13, 6, 2.75),
    (13, 8, 2.75),
    (14, 6, 3.00),
    (14, 8, 3.00),
    (15, 5, 3.25),
    (15, 6, 3.00),
    (16, 6, 3.00),
    (16, 7, 3.00),
    (16, 8, 3.25),
    (17, 6, 3.50),
    (17, 7, 3.50),
    (18, 8, 3.50),
    (18, 9, 3.75),
    (19, 8, 3.75),
    (19, 9, 4.00),
    (20, 8, 4.25),
    (20, 9, 4.00),
    (20, 11, 4.25),
]


def chain_length(n):
    """Physical qubits per logical qubit used by the clique embedding."""
    return 2 if n <= 10 else 3


def default_seed():
    value = os.environ.get(SEED_ENV_VAR)
    if value is None or not value.strip():
        return DEFAULT_SEED
    return int(value)


def load_config_file(path):
    """
    Reads a key=value config file. Keys mirror the long CLI flags
    (dashes or underscores both accepted). Blank lines and '#' comments are skipped.

    Returns:
        dict: {flag_name_with_underscores: raw string value}
    """
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values
