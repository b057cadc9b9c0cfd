"""Command line: notarize, redact, verify, demo."""
from __future__ import annotations

import argparse
import json
import sys

from ..notarize import (DIRECTIONS, Attestation, AttestationFormatError, RangeOutOfBounds, RangeOverlap,
                        redact_attestation, verify_attestation)
from .session import SessionConfig, load_config, run_session


def parse_ranges(text: str) -> list[tuple[int, int, int]]:
    """``a..b,recv:c..d`` -> [(dir, a, b), ...]; a bare range means the sent direction."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        d = "sent"
        if ":" in part:
            d, part = part.split(":", 1)
        if d not in DIRECTIONS or ".." not in part:
            raise argparse.ArgumentTypeError(f"bad range {part!r}; use a..b or recv:a..b")
        a, b = part.split("..", 1)
        out.append((DIRECTIONS[d], int(a), int(b)))
    return out


def _dump(obj, path: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as f:
            f.write(text + "\n")


def cmd_notarize(args) -> int:
    cfg = load_config(args.config) if args.config else SessionConfig()
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.seeds = None
    res = run_session(cfg)
    if not res.ok:
        _dump({"aborted": res.abort.as_dict()}, None)
        return 1
    _dump(res.attestation.to_json(), args.out)
    print(f"notary key {res.notary_key.hex()}", file=sys.stderr)
    return 0


def cmd_redact(args) -> int:
    with open(args.inp) as f:
        att = Attestation.loads(f.read())
    try:
        out = redact_attestation(att, args.ranges)
    except (RangeOutOfBounds, RangeOverlap) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    _dump(out.to_json(), args.out)
    return 0


def cmd_verify(args) -> int:
    try:
        with open(args.inp) as f:
            att = Attestation.loads(f.read())
    except (AttestationFormatError, ValueError) as e:
        _dump({"accepted": False, "error": str(e)}, None)
        return 1
    rep = verify_attestation(att, bytes.fromhex(args.notary_key))
    _dump(rep.to_json(), None)
    return 0 if rep.accepted else 1


def cmd_demo(args) -> int:
    from ..vectors import all_checks

    ok = True
    for name, passed, detail in all_checks():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlsn-desk", description="Desk-scale TLS notarization simulator")
    sub = p.add_subparsers(dest="cmd", required=True)
    n = sub.add_parser("notarize", help="run a simulated session and write its attestation")
    n.add_argument("--config", help="JSON session config (curve, profile, request/response hex, seeds)")
    n.add_argument("--out", default="-")
    n.add_argument("--seed", type=int)
    n.set_defaults(fn=cmd_notarize)
    r = sub.add_parser("redact", help="redact byte ranges of an attestation")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--ranges", type=parse_ranges, required=True, help="a..b,recv:c..d (end exclusive)")
    r.add_argument("--out", default="-")
    r.set_defaults(fn=cmd_redact)
    v = sub.add_parser("verify", help="verify an attestation; exit 0 accept, 1 reject")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--notary-key", required=True, help="Notary Ed25519 public key, hex")
    v.set_defaults(fn=cmd_verify)
    d = sub.add_parser("demo", help="fixture checks")
    d.add_argument("what", choices=["vectors"])
    d.set_defaults(fn=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
