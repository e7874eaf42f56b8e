"""Audit pipeline for driver data-access bundles.

Thin wrappers over the native core. Reports come back as parsed JSON.
"""

import json
import os

from ._core import (
    AuditError,
    PII_MARKER,
    SALT_ENV_VAR,
    cmd_anon,
    cmd_audit,
    cmd_predict,
    cmd_synth,
    era_of,
    fit_ols,
    pseudonym,
    r2_score,
)
from . import _core

__all__ = [
    "AuditError",
    "PII_MARKER",
    "SALT_ENV_VAR",
    "audit_report",
    "cmd_anon",
    "cmd_audit",
    "cmd_predict",
    "cmd_synth",
    "era_of",
    "fit_ols",
    "generate",
    "pseudonym",
    "r2_score",
]


def generate(config, out):
    """Write synthetic bundles under out/bundles and return the ground truth."""
    return json.loads(_core.generate(json.dumps(config), os.fspath(out)))


def audit_report(root, **options):
    """Run the full audit over a bundle root and return the report as a dict."""
    return json.loads(_core.audit_report(os.fspath(root), **options))
