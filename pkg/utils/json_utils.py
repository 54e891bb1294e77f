#!/usr/bin/env python3
"""
Utility to turn numpy scalars, arrays and complex numbers into plain JSON values
"""

import json
import math
from typing import Any

import numpy as np


def sanitize_for_json(obj: Any) -> Any:
    """
    Recursively convert numpy values to Python ones; complex numbers become
    [real, imag] and non-finite floats become None
    """
    if isinstance(obj, dict):
        return {str(key): sanitize_for_json(value) for key, value in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [sanitize_for_json(item) for item in obj]
    elif isinstance(obj, np.ndarray):
        return sanitize_for_json(obj.tolist())
    elif isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    elif isinstance(obj, (int, np.integer)):
        return int(obj)
    elif isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    elif isinstance(obj, (complex, np.complexfloating)):
        return [sanitize_for_json(obj.real), sanitize_for_json(obj.imag)]
    else:
        return obj


def safe_json_dumps(obj: Any, **kwargs) -> str:
    """
    Safely serialize object to JSON, converting numpy values automatically
    """
    return json.dumps(sanitize_for_json(obj), **kwargs)
