"""Desk-scale TLS session notarization stack.

OT, OLE and share conversion, garbled circuits with dual execution, a
three-party ECDH handshake, a two-party GHASH MAC, a 2PC record layer and
the attestation pipeline, all driven by a deterministic in-process harness.
"""

__version__ = "0.1.0"
