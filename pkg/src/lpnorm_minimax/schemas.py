"""JSON schemas for the command-line reports.

Non-finite floats are written as the strings ``"inf"``, ``"-inf"`` and
``"nan"``; exact rationals and extended-precision values as decimal strings.
"""

NUM = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf", "nan"]}]}
NUM_OR_NULL = {"oneOf": [NUM, {"type": "null"}]}
DECIMAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+|(\.[0-9]+)?([eE][-+]?[0-9]+)?)$"}

PROVENANCE = {
    "config_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
    "seed": {"type": "integer", "minimum": 0},
    "command": {"type": "string"},
}


def _report(props: dict, required: list) -> dict:
    return {
        "type": "object",
        "properties": {**PROVENANCE, **props},
        "required": ["config_hash", "seed", "command", *required],
    }


RATES = _report({
    "theta": NUM_OR_NULL, "theta_star": NUM_OR_NULL, "vartheta": NUM_OR_NULL,
    "vartheta_star": NUM_OR_NULL, "regime": {"type": "string"},
    "gamma1": NUM_OR_NULL, "gamma2": NUM_OR_NULL,
    "zone": {"type": ["string", "null"]},
    "tau_at": {"type": "object", "required": ["1", "p", "q", "inf"],
               "additionalProperties": NUM},
}, ["theta", "theta_star", "vartheta", "vartheta_star", "regime", "gamma1", "gamma2",
    "tau_at"])

PIECE = {
    "type": "object",
    "properties": {"interval": {"type": "array", "items": DECIMAL, "minItems": 2, "maxItems": 2},
                   "coefficients": {"type": "array", "items": DECIMAL},
                   "extra_terms": {"type": "array"}},
    "required": ["interval", "coefficients"],
}
MEASURE = {
    "type": "object",
    "properties": {"atoms": {"type": "array", "items": {
        "type": "array", "items": DECIMAL, "minItems": 2, "maxItems": 2}},
        "pieces": {"type": "array", "items": PIECE}},
    "required": ["atoms", "pieces"],
}

PRIORS = _report({
    "mode": {"enum": ["prop1", "prop2"]},
    "mu": MEASURE, "nu": MEASURE,
    "moments": {"type": "array", "items": {
        "type": "object", "required": ["k", "mu", "nu", "difference"],
        "properties": {"k": {"type": "integer"}, "mu": DECIMAL, "nu": DECIMAL,
                       "difference": DECIMAL}}},
    "gap": NUM,
    "certificate": {"type": "object"},
}, ["mode", "mu", "nu", "moments", "gap", "certificate"])

CHECK = {"type": "object", "required": ["lhs", "rhs", "ok"],
         "properties": {"lhs": NUM, "rhs": NUM, "ok": {"type": "boolean"}, "margin": NUM}}

FAMILY = _report({
    "feasible": {"type": "boolean"},
    "M": {"type": ["integer", "null"]},
    "J": {"oneOf": [{"type": "null"}, {"type": "array", "items": NUM}]},
    "checks": {"type": "object", "additionalProperties": CHECK},
    "identities": {"type": "object"},
    "violated": {"type": "array"},
}, ["feasible", "M", "J", "checks", "violated"])

LB = _report({
    "feasible": {"type": "boolean"},
    "reps": {"type": "integer"},
    "M": {"type": ["integer", "null"]},
    "delta": NUM_OR_NULL,
    "c_star": NUM_OR_NULL,
    "p_upsilon_half": NUM_OR_NULL,
    "p_upsilon_half_stderr": NUM_OR_NULL,
    "freq_rho_concentration": NUM_OR_NULL,
    "freq_S_concentration": NUM_OR_NULL,
    "freq_counts_small": NUM_OR_NULL,
    "implication_holds": {"type": ["boolean", "null"]},
    "selection": {"type": "object"},
    "notes": {"type": "array", "items": {"type": "string"}},
}, ["feasible", "reps", "M", "delta", "p_upsilon_half", "selection", "notes"])

RISK = _report({
    "n_grid": {"type": "array", "items": {"type": "integer"}},
    "risks": {"type": "array", "items": NUM},
    "stderrs": {"type": "array", "items": NUM},
    "slope": NUM, "slope_stderr": NUM,
    "predicted_exponent": NUM_OR_NULL, "margin": NUM_OR_NULL,
    "reps": {"type": "integer"}, "truth": NUM,
}, ["n_grid", "risks", "stderrs", "slope", "slope_stderr", "predicted_exponent", "reps"])

ERROR = {
    "type": "object",
    "properties": {"error": {"type": "string"}, "field": {"type": ["string", "null"]}},
    "required": ["error"],
}

SCHEMAS = {
    "rates": RATES,
    "priors": PRIORS,
    "family-check": FAMILY,
    "lb-experiment": LB,
    "plugin-risk": RISK,
}

CSV_HEADERS = {
    "lb-experiment": ["rep", "log_upsilon", "upsilon_ge_half", "rho_concentrated",
                      "S_concentrated", "counts_small", "eta_bounded", "n0", "max_count",
                      "rho"],
    "plugin-risk": ["n", "risk", "stderr", "bandwidth"],
}
