"""Published JSON schemas for every machine-readable output."""

_number = {"type": "number"}
_nullable_number = {"type": ["number", "null"]}

SCENARIO = {
    "type": "object",
    "properties": {"lambda": {"type": "number", "minimum": 0},
                   "r0": {"type": "number", "exclusiveMinimum": 0},
                   "L": {"type": "number", "exclusiveMinimum": 0}},
    "required": ["lambda", "r0", "L"],
}

MOMENT_POLYNOMIAL = {
    "type": "object",
    "properties": {
        "powers": {
            "type": "object",
            "patternProperties": {r"^[0-9]+$": {"type": "string", "pattern": r"^-?[0-9]+/[0-9]+$"}},
            "additionalProperties": False,
        }
    },
    "required": ["powers"],
}

MANIFEST = {
    "type": "object",
    "properties": {
        "command": {"type": "string"},
        "parameters": {"type": "object"},
        "root_seed": {"type": "integer", "minimum": 0},
        "version": {"type": "string"},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "created": {"type": "string"},
    },
    "required": ["command", "parameters", "root_seed", "version", "outputs", "created"],
}

SUMMARY = {
    "type": "object",
    "properties": {
        "scenario": SCENARIO,
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "algorithm": {"enum": ["lens_chains", "bfs", "both"]},
        "k": {"type": "integer", "minimum": 1},
        "big_lambda": _number,
        "mean": _number,
        "variance": _number,
        "m3": _number,
        "se_mean": _number,
        "se_variance": _nullable_number,
        "se_m3": _nullable_number,
        "zero_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "pmf": {"type": "array",
                "items": {"type": "array", "prefixItems": [{"type": "integer"}, _number],
                          "minItems": 2, "maxItems": 2}},
        "manifest": MANIFEST,
    },
    "required": ["scenario", "trials", "seed", "mean", "variance", "m3", "se_mean", "zero_fraction", "pmf"],
}

COMPARISON = {
    "type": "object",
    "properties": {
        "k": {"type": "integer"},
        "big_lambda": _number,
        "checks": {"type": "array", "items": {
            "type": "object",
            "properties": {"quantity": {"type": "string"}, "source": {"type": "string"},
                           "analytic": _number, "estimate": _number,
                           "se": _nullable_number, "z": _nullable_number, "pass": {"type": "boolean"}},
            "required": ["quantity", "source", "analytic", "estimate", "se", "z", "pass"],
        }},
    },
    "required": ["k", "big_lambda", "checks"],
}

_sourced = {"type": "object", "additionalProperties": _nullable_number}

ANALYTIC = {
    "type": "object",
    "properties": {
        "scenario": {"anyOf": [SCENARIO, {"type": "null"}]},
        "k": {"type": "integer", "minimum": 1},
        "big_lambda": _number,
        "mean": _number,
        "variance": _sourced,
        "m3": _sourced,
        "polynomials": {"type": "object", "additionalProperties": {"anyOf": [MOMENT_POLYNOMIAL, {"type": "null"}]}},
    },
    "required": ["k", "big_lambda", "mean", "variance", "m3"],
}

REBROADCAST = {
    "type": "object",
    "properties": {
        "scenario": SCENARIO,
        "target": _number,
        "k": {"type": "integer"},
        "big_lambda": _number,
        "nu": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "raw_nu": _number,
        "clamped": {"type": "boolean"},
        "implied_target": _number,
    },
    "required": ["scenario", "target", "k", "big_lambda", "nu", "clamped", "implied_target"],
}

SIMULATE = {
    "type": "object",
    "properties": {"summary": SUMMARY, "comparison": COMPARISON, "manifest": MANIFEST},
    "required": ["summary", "comparison", "manifest"],
}

PMF = {
    "type": "object",
    "properties": {
        "bins": {"type": "array", "items": {
            "type": "object",
            "properties": {"sigma": {"type": "string"}, "freq": _number, "ci_lo": _number, "ci_hi": _number},
            "required": ["sigma", "freq", "ci_lo", "ci_hi"]}},
        "summary": SUMMARY,
        "manifest": MANIFEST,
    },
    "required": ["bins", "summary", "manifest"],
}

SWEEP = {
    "type": "object",
    "properties": {"rows": {"type": "array", "items": {"type": "object"}}, "manifest": MANIFEST},
    "required": ["rows", "manifest"],
}
