# SPDX-License-Identifier: Apache-2.0
"""Blockchain-backed SCADA data acquisition.

Thin wrapper over the compiled ``_porch`` core: DNP3m framing, the
measurement ledger (SHA-256 / Merkle), random-count mining-node selection,
and a full simulated acquisition run.
"""

try:
    # Installed layout: the extension lives inside the package.
    from porch._porch import (  # noqa: F401
        PorchError,
        choose_eligible,
        count_occurrences,
        decode_frame,
        double_sha256_hex,
        encode_frame,
        fragment,
        merkle_root,
        resolve_counts,
        run_simulation,
        sha256_hex,
        validate_chain,
    )
except ImportError:
    # Build-tree layout: the extension sits on PYTHONPATH.
    from _porch import (  # noqa: F401
        PorchError,
        choose_eligible,
        count_occurrences,
        decode_frame,
        double_sha256_hex,
        encode_frame,
        fragment,
        merkle_root,
        resolve_counts,
        run_simulation,
        sha256_hex,
        validate_chain,
    )

REQUEST = 0
RESPONSE = 1

__all__ = [
    "PorchError",
    "REQUEST",
    "RESPONSE",
    "choose_eligible",
    "count_occurrences",
    "decode_frame",
    "double_sha256_hex",
    "encode_frame",
    "fragment",
    "merkle_root",
    "resolve_counts",
    "run_simulation",
    "sha256_hex",
    "validate_chain",
]
