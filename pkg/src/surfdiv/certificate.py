"""Self-contained JSON certificates and their verification.

A certificate embeds the lattice (Gram matrix, K, curves), the target
class, the generator coefficients and the full trace. Rationals are written
as "p/q" strings so the file round-trips exactly. Verification rebuilds
everything from the document alone.
"""

from __future__ import annotations

import json
from fractions import Fraction

from . import linalg
from .cones import EffectivityCertificate
from .lattice import SurfaceLattice, lattice_from_data
from .nonvanishing import AlgorithmTrace, TraceStep
from .scalars import fmt
from .verify import VerifyResult, verify_trace

FORMAT = "surfdiv-certificate/1"

# string-valued fields that must not be read back as rationals
_TEXT_KEYS = {"kind", "role", "case", "branch", "source", "tag", "name", "format", "command"}


class CertificateFormatError(ValueError):
    pass


def _enc(x):
    if isinstance(x, bool):
        return x
    if isinstance(x, (int, Fraction)):
        return fmt(x)
    if isinstance(x, dict):
        return {str(k): (v if k in _TEXT_KEYS else _enc(v)) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    if isinstance(x, str):
        return x
    raise TypeError(f"cannot encode {type(x).__name__}")


def _dec(x):
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            raise CertificateFormatError(f"expected a rational, got {x!r}") from None
    if isinstance(x, list):
        return [_dec(v) for v in x]
    if isinstance(x, dict):
        return {k: (v if k in _TEXT_KEYS else _dec(v)) for k, v in x.items()}
    if isinstance(x, (int, bool)):
        return x
    raise CertificateFormatError(f"unexpected value {x!r}")


def encode_lattice(data: dict) -> dict:
    return {
        "rank": len(data["gram"]),
        "gram": _enc(data["gram"]),
        "K": _enc(data["K"]),
        "curves": [{"class": _enc(c), "genus": int(g), "name": n} for c, g, n in data["curves"]],
        "labels": list(data["labels"]),
        "tag": data["tag"],
    }


def decode_lattice(doc: dict) -> dict:
    try:
        curves = [[_dec(c["class"]), int(c["genus"]), str(c["name"])] for c in doc["curves"]]
        data = {
            "gram": _dec(doc["gram"]),
            "K": _dec(doc["K"]),
            "curves": curves,
            "labels": [str(x) for x in doc["labels"]],
            "tag": str(doc["tag"]),
        }
    except (KeyError, TypeError) as exc:
        raise CertificateFormatError(f"malformed lattice block: {exc}") from None
    if int(doc.get("rank", len(data["gram"]))) != len(data["gram"]):
        raise CertificateFormatError("declared rank differs from the Gram matrix")
    return data


def _lattice_data(lattice: SurfaceLattice) -> dict:
    return {
        "gram": [list(r) for r in lattice.gram],
        "K": list(lattice.canonical.coords),
        "curves": [[list(c.cls.coords), c.genus, c.name] for c in lattice.curves],
        "labels": list(lattice.basis_labels),
        "tag": lattice.model_tag,
    }


def encode_step(step: TraceStep) -> dict:
    data = {}
    for k, v in step.data.items():
        if k == "target" and isinstance(v, dict):
            data[k] = encode_lattice(v)
        elif k in _TEXT_KEYS:
            data[k] = v
        else:
            data[k] = _enc(v)
    return {"kind": step.kind, "level": step.level, "data": data}


def decode_step(doc: dict) -> TraceStep:
    data = {}
    for k, v in doc["data"].items():
        if k == "target" and isinstance(v, dict):
            data[k] = decode_lattice(v)
        elif k in _TEXT_KEYS:
            data[k] = v
        else:
            data[k] = _dec(v)
    return TraceStep(str(doc["kind"]), int(doc["level"]), data)


def certificate_document(lattice: SurfaceLattice, cert: EffectivityCertificate, trace: AlgorithmTrace,
                         command: str = "nonvanish", extra: dict | None = None) -> dict:
    doc = {
        "format": FORMAT,
        "command": command,
        "lattice": encode_lattice(_lattice_data(lattice)),
        "target": _enc(cert.target.coords),
        "coefficients": [
            {"generator": i, "name": n, "value": fmt(a)}
            for i, n, a in zip(cert.indices, cert.labels, cert.coefficients)
        ],
        "trace": [encode_step(s) for s in trace],
    }
    if extra:
        doc.update(extra)
    return doc


def singular_block(s, result) -> dict:
    """Embedded data for a certificate on a singular surface X."""
    cert = result.certificate
    return {
        "singular": {
            "exceptional": list(s.exceptional_indices),
            "B": _enc(s.b_coeffs),
            "quotient_basis": _enc([list(b.coords) for b in s.quotient_basis]),
            "target": _enc(cert.target.coords),
            "L": _enc(list(linalg.matvec(linalg.left_inverse([list(b.coords) for b in s.quotient_basis]),
                                         (result.L_tilde - s.B).coords))),
            "coefficients": [
                {"source": str(s.curve_sources[j]), "name": n, "value": fmt(a)}
                for j, n, a in zip(cert.indices, cert.labels, cert.coefficients)
            ],
        }
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(f"not a JSON document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CertificateFormatError(f"missing or unknown format tag (expected {FORMAT})")
    for key in ("lattice", "target", "coefficients", "trace"):
        if key not in doc:
            raise CertificateFormatError(f"missing field {key!r}")
    return doc


def _reject(reason: str, kind: str = "certificate") -> VerifyResult:
    return VerifyResult(False, None, kind, reason)


def verify_document(doc: dict) -> VerifyResult:
    """Check a decoded certificate document; never consults anything outside it."""
    try:
        data = decode_lattice(doc["lattice"])
        lattice = lattice_from_data(data)
    except CertificateFormatError:
        raise
    except Exception as exc:
        return _reject(f"embedded lattice rejected: {exc}", "lattice")
    try:
        target = lattice.cls(_dec(doc["target"]))
        idx, gens, coeffs, labels = [], [], [], []
        for entry in doc["coefficients"]:
            i = int(entry["generator"])
            if not 0 <= i < len(lattice.curves):
                return _reject(f"unknown generator {i}")
            idx.append(i)
            gens.append(lattice.curves[i].cls)
            coeffs.append(_dec(entry["value"]))
            labels.append(lattice.curves[i].name)
        steps = [decode_step(s) for s in doc["trace"]]
    except CertificateFormatError:
        raise
    except Exception as exc:
        raise CertificateFormatError(f"malformed certificate body: {exc}") from None
    total = lattice.zero()
    for g, a in zip(gens, coeffs):
        total = total + a * g
    if total != target:
        return _reject("coefficients times generators do not sum to the target class")
    if any(a < 0 for a in coeffs):
        return _reject("negative coefficient")
    cert = EffectivityCertificate(tuple(gens), tuple(coeffs), target, tuple(labels), tuple(idx))
    result = verify_trace(lattice, cert, AlgorithmTrace(steps))
    if not result or "singular" not in doc:
        return result
    return _verify_singular(lattice, doc["singular"], target)


def _verify_singular(lattice: SurfaceLattice, block: dict, target) -> VerifyResult:
    try:
        exc = [int(i) for i in block["exceptional"]]
        b = _dec(block["B"])
        basis = _dec(block["quotient_basis"])
        target_x = _dec(block["target"])
        L_x = _dec(block["L"])
        cx = [(int(e["source"]), _dec(e["value"])) for e in block["coefficients"]]
    except Exception as err:
        raise CertificateFormatError(f"malformed singular block: {err}") from None
    for i in exc + [s for s, _ in cx]:
        if not 0 <= i < len(lattice.curves):
            return _reject(f"unknown generator {i}", "singular")
    E = [lattice.curves[i].cls for i in exc]
    K = lattice.canonical
    for e in E:
        if lattice.pair(K, e) < 0:
            return _reject("exceptional set contains a (-1)-curve", "singular")
    if E:
        gram = lattice.gram_of(E)
        if not linalg.is_negative_definite(gram):
            return _reject("exceptional Gram is not negative definite", "singular")
        if linalg.matvec(gram, b) != [-lattice.pair(K, e) for e in E] or any(x < 0 for x in b):
            return _reject("B does not solve the discrepancy system", "singular")
    rows = [lattice.cls(v) for v in basis]
    if any(lattice.pair(v, e) != 0 for v in rows for e in E) or any(
        x.denominator != 1 for v in basis for x in v
    ):
        return _reject("quotient basis is not integral and orthogonal to the exceptional curves", "singular")
    if linalg.rank(basis) != lattice.rank - len(E) or len(basis) != lattice.rank - len(E):
        return _reject("quotient basis has the wrong rank", "singular")
    B = sum((x * e for x, e in zip(b, E)), lattice.zero())
    hL = sum((a * v for a, v in zip(L_x, rows)), lattice.zero())
    if target != K + B + hL:
        return _reject("resolution target is not K + B + h^*L", "singular")
    left = linalg.left_inverse(basis)

    def push(v):
        w = v
        if E:
            z = linalg.solve(lattice.gram_of(E), [lattice.pair(v, e) for e in E])
            for zi, e in zip(z, E):
                w = w - zi * e
        return linalg.matvec(left, w.coords)

    if push(target) != list(target_x):
        return _reject("X target is not the pushforward of the resolution target", "singular")
    got: dict = {}
    for s, a in cx:
        got[s] = got.get(s, Fraction(0)) + a
    if any(a < 0 for a in got.values()):
        return _reject("negative coefficient on X", "singular")
    total = [Fraction(0)] * len(basis)
    for s, a in got.items():
        total = [t + a * x for t, x in zip(total, push(lattice.curves[s].cls))]
    if total != list(target_x):
        return _reject("X coefficients do not sum to K_X + L", "singular")
    return VerifyResult(True)


def verify_text(text: str) -> VerifyResult:
    return verify_document(load_document(text))
