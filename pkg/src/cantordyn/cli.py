"""Command-line front end.

Exit codes: 0 success / property holds, 1 checked false or absent within
bounds, 2 usage, validation or resource error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fraisse, odometer, spiral, tower
from .findyn import (
    DynamicsError,
    EquivariantMap,
    FiniteSystem,
    ResourceLimitError,
    cycle_decomposition,
    system_from_json,
    system_to_dict,
)
from .odometer import OdometerSpec
from .tower import LevelPartition, PreconditionError, Tower

OK, FALSE, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, text: str, payload=None) -> None:
    if args.json and payload is not None:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _write(path: str | None, content: str) -> None:
    if path:
        Path(path).write_text(content)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DynamicsError(f"malformed JSON in {path}: {exc}") from None


def _spec(text: str) -> OdometerSpec:
    try:
        return OdometerSpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _perm_system(text: str) -> FiniteSystem:
    """A JSON file path or a comma-separated cycle type such as ``2,3``."""
    if text.endswith(".json"):
        try:
            return system_from_json(Path(text).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {text}: {exc.strerror}") from None
    lengths = _ints(text)
    if not lengths or min(lengths) < 1:
        raise UsageError(f"bad cycle type {text!r}")
    return FiniteSystem.from_cycle_type(lengths)


# spiral

def cmd_spiral_build(args) -> int:
    level = spiral.build_level(args.n)
    sizes = {"n": args.n, "states": level.system.size, "spirals": 6 ** args.n,
             "per_spiral": spiral.spiral_size(args.n)}
    if args.out:
        _write(args.out, json.dumps(system_to_dict(level.system)))
    _emit(args, f"W_{args.n}: {sizes['states']} states in {sizes['spirals']} spirals "
                f"of {sizes['per_spiral']}", sizes)
    return OK


def cmd_spiral_verify(args) -> int:
    good = spiral.verify_xi_morphism(args.n)
    _emit(args, f"xi morphism: {'OK' if good else 'FAILED'}", {"n": args.n, "ok": good})
    return OK if good else FALSE


def cmd_spiral_wandering(args) -> int:
    level = spiral.build_level(args.n)
    pts = spiral.wandering_points(level)
    only_m = all(p.side == "m" for p in pts) and len(pts) == len(level.side_states("m"))
    _emit(args, f"W_{args.n}: {len(pts)} wandering points"
                + (" (exactly the middle chains)" if only_m else ""),
          {"n": args.n, "count": len(pts), "points": [str(p) for p in pts]})
    return OK if pts else FALSE


def cmd_spiral_export(args) -> int:
    if args.single:
        sys_ = spiral.build_spiral(args.n)
        name = f"S_{args.n}"
    else:
        sys_ = spiral.build_level(args.n).system
        name = f"W_{args.n}"
    if args.format == "dot":
        content = spiral.level_to_dot(sys_, name)
    else:
        content = json.dumps(system_to_dict(sys_))
    if args.out:
        _write(args.out, content)
        print(f"wrote {name} ({sys_.size} states) to {args.out}")
    else:
        sys.stdout.write(content if content.endswith("\n") else content + "\n")
    return OK


# odometer

def cmd_odometer_step(args) -> int:
    spec = _spec(args.spec)
    try:
        out = odometer.step(spec, _ints(args.point))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, ",".join(map(str, out)), {"spec": str(spec), "image": list(out)})
    return OK


def cmd_odometer_truncate(args) -> int:
    spec = _spec(args.spec)
    sys_ = odometer.truncation(spec, args.n)
    lengths = cycle_decomposition(sys_).lengths
    if args.out:
        _write(args.out, json.dumps(system_to_dict(sys_)))
    single = len(lengths) == 1
    _emit(args, f"level {args.n}: {sys_.size} states, "
                + ("a single cycle" if single else f"cycle lengths {list(lengths)}"),
          {"spec": str(spec), "n": args.n, "states": sys_.size, "cycle_lengths": list(lengths)})
    return OK if single else FALSE


def cmd_odometer_conj(args) -> int:
    a, b = _spec(args.a), _spec(args.b)
    sa, sb = odometer.supernatural(a), odometer.supernatural(b)
    same = sa == sb
    _emit(args, ("conjugate" if same else "not conjugate") + f" ({sa} vs {sb})",
          {"a": a.to_dict(), "b": b.to_dict(), "supernatural_a": sa.to_json(),
           "supernatural_b": sb.to_json(), "conjugate": same})
    return OK if same else FALSE


def cmd_odometer_phi(args) -> int:
    spec = _spec(args.spec)
    if args.k < 1:
        raise UsageError("--k must be positive")
    holds, level = odometer.phi_k_odometer(spec, args.k)
    text = (f"phi_{args.k} holds (first at level {level})" if holds
            else f"phi_{args.k} fails: {args.k} does not divide {odometer.supernatural(spec)}")
    _emit(args, text, {"spec": str(spec), "k": args.k, "holds": holds, "level": level})
    return OK if holds else FALSE


def cmd_odometer_swap(args) -> int:
    spec = _spec(args.spec)
    holds = odometer.swap_sentence_holds(spec)
    text = "holds: σ(x)=1−x satisfiable" if holds else "fails: σ(x)=1−x unsatisfiable"
    _emit(args, text, {"spec": str(spec), "holds": holds})
    return OK if holds else FALSE


# tower

def _load_tower(args) -> Tower:
    sources = [s for s in (args.tower, args.odometer, args.spiral) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --tower, --odometer, --spiral")
    if args.tower is not None:
        try:
            return Tower.from_json(Path(args.tower).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {args.tower}: {exc.strerror}") from None
    if args.odometer is not None:
        return odometer.odometer_tower(_spec(args.odometer), args.levels)
    if args.spiral < 1:
        raise UsageError("--spiral must be >= 1")
    return tower.spiral_tower(args.spiral)


def cmd_tower_validate(args) -> int:
    t = _load_tower(args)
    good, why = tower.validate(t)
    _emit(args, "valid" if good else f"invalid: {why}",
          {"valid": good, "reason": why, "sizes": [s.size for s in t.levels]})
    return OK if good else FALSE


def cmd_tower_star(args) -> int:
    t = _load_tower(args)
    w = tower.property_star(t, args.depth)
    if w is None:
        _emit(args, f"absent within depth {args.depth}", {"found": False})
        return FALSE
    _emit(args, f"found: a = {list(w.bases)}",
          {"found": True, "bases": list(w.bases),
           "partitions": [{"level": p.level, "blocks": [sorted(b) for b in p.blocks]}
                          for p in w.partitions]})
    return OK


def cmd_tower_wandering(args) -> int:
    t = _load_tower(args)
    u = tower.wandering_clopen_exists(t, args.depth)
    if u is None:
        _emit(args, "no wandering clopen set within bounds", {"found": False})
        return FALSE
    (x,) = u.states
    label = str(t.levels[u.level].labels[x])
    _emit(args, f"wandering clopen at level {u.level}: {label}",
          {"found": True, "level": u.level, "state": x, "label": label})
    return OK


def _load_phi(args, t: Tower) -> EquivariantMap:
    if args.phi is None:
        return EquivariantMap.identity(t.levels[0])
    data = _read_json(args.phi)
    try:
        level = int(data["level"])
        n = int(data["target_level"])
        return EquivariantMap(t.levels[level], spiral.build_level(n).system,
                              tuple(data["assignment"]))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise DynamicsError(f"malformed phi JSON: {exc}") from None


def cmd_tower_lift(args) -> int:
    t = _load_tower(args)
    phi = _load_phi(args, t)
    j = t.level_of(phi.source)
    if args.partition is None:
        a = LevelPartition.of_map(j, phi)
    else:
        data = _read_json(args.partition)
        try:
            a = LevelPartition(int(data["level"]), tuple(data["blocks"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DynamicsError(f"malformed partition JSON: {exc}") from None
    result = tower.lifting_check(t, phi, a, args.max_k, args.max_level)
    if not result.found:
        _emit(args, f"absent within bounds (k <= {args.max_k}, level <= {args.max_level})",
              {"outcome": "absent"})
        return FALSE
    if args.out:
        _write(args.out, json.dumps({"level": result.level, "k": result.k,
                                     "assignment": list(result.psi.assignment)}))
    _emit(args, f"found: psi from level {result.level} onto W_{result.k + _phi_n(phi)} (k = {result.k})",
          {"outcome": "found", "k": result.k, "level": result.level})
    return OK


def _phi_n(phi: EquivariantMap) -> int:
    return phi.target.labels[0].level


# fraisse

def cmd_fraisse_jep(args) -> int:
    x, y = _perm_system(args.x), _perm_system(args.y)
    z, px, py = fraisse.jep(x, y)
    lengths = list(cycle_decomposition(z).lengths)
    if args.out:
        _write(args.out, json.dumps(system_to_dict(z)))
    _emit(args, f"apex: {z.size} states, cycle lengths {lengths}; projections certified",
          {"states": z.size, "cycle_lengths": lengths,
           "px": list(px.assignment), "py": list(py.assignment)})
    return OK


def cmd_fraisse_amalgamate(args) -> int:
    p = fraisse.problem_from_dict(_read_json(args.problem))
    s = fraisse.amalgamate(p)
    good = fraisse.verify_amalgam(p, s)
    if args.out:
        _write(args.out, json.dumps(fraisse.solution_to_dict(s)))
    _emit(args, f"apex: {s.apex.size} states, (n, m) per base cycle {list(s.shape)}; "
                f"verify: {'OK' if good else 'FAILED'}",
          {"solution": fraisse.solution_to_dict(s), "verified": good})
    return OK if good else FALSE


def cmd_fraisse_chain(args) -> int:
    t = fraisse.generic_chain(_ints(args.schedule), args.depth)
    if args.out:
        _write(args.out, t.to_json())
    sizes = [s.size for s in t.levels]
    _emit(args, f"chain of {len(sizes)} levels, sizes {sizes}", {"sizes": sizes})
    return OK


def cmd_fraisse_certify(args) -> int:
    try:
        chain = Tower.from_json(Path(args.chain).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.chain}: {exc.strerror}") from None
    report = fraisse.not_special_certificate(chain, args.spiral_depth)
    _emit(args, "\n".join(report.lines()),
          {"level_orders": report.level_orders, "max_atom_period": report.max_atom_period,
           "periods_divide_order": report.periods_divide_order,
           "spiral_wandering": {str(k): v for k, v in report.spiral_wandering.items()},
           "ok": report.ok})
    return OK if report.ok else FALSE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cantordyn",
                                     description="Cantor systems as towers of finite systems")
    groups = parser.add_subparsers(dest="group", required=True)

    def sub(group, name, func, help_):
        p = group.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=func)
        return p

    sp = groups.add_parser("spiral", help="spiral levels W_n").add_subparsers(dest="cmd", required=True)
    p = sub(sp, "build", cmd_spiral_build, "build W_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p = sub(sp, "verify", cmd_spiral_verify, "check xi: W_{n+1} -> W_n preserves the relation")
    p.add_argument("--n", type=int, required=True)
    p = sub(sp, "wandering", cmd_spiral_wandering, "wandering points of W_n")
    p.add_argument("--n", type=int, required=True)
    p = sub(sp, "export", cmd_spiral_export, "DOT or JSON export")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--single", action="store_true", help="one spiral instead of W_n")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--out")

    od = groups.add_parser("odometer", help="odometers").add_subparsers(dest="cmd", required=True)
    p = sub(od, "step", cmd_odometer_step, "one odometer step on a digit vector")
    p.add_argument("--spec", required=True, help="pre:period, e.g. 6:5 or :2")
    p.add_argument("--point", required=True, help="digits, comma-separated")
    p = sub(od, "truncate", cmd_odometer_truncate, "finite truncation")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p = sub(od, "conj", cmd_odometer_conj, "decide conjugacy")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p = sub(od, "phi", cmd_odometer_phi, "k clopen sets cyclically permuted")
    p.add_argument("--spec", required=True)
    p.add_argument("--k", type=int, required=True)
    p = sub(od, "swap", cmd_odometer_swap, "nontrivial clopen U with sigma(U) = complement")
    p.add_argument("--spec", required=True)

    tw = groups.add_parser("tower", help="towers").add_subparsers(dest="cmd", required=True)

    def tower_sub(name, func, help_):
        p = sub(tw, name, func, help_)
        p.add_argument("--tower", help="tower JSON file")
        p.add_argument("--odometer", help="build the odometer tower of this spec")
        p.add_argument("--levels", type=int, default=4, help="levels of an odometer tower")
        p.add_argument("--spiral", type=int, help="build W_1 <- ... <- W_top")
        return p

    tower_sub("validate", cmd_tower_validate, "check tower invariants")
    p = tower_sub("star", cmd_tower_star, "odometer-like partition chain")
    p.add_argument("--depth", type=int, default=3)
    p = tower_sub("wandering", cmd_tower_wandering, "search a wandering clopen atom")
    p.add_argument("--depth", type=int, default=None)
    p = tower_sub("lift", cmd_tower_lift, "bounded lifting check")
    p.add_argument("--phi", help="JSON {level, target_level, assignment}; default identity on level 0")
    p.add_argument("--partition", help="JSON {level, blocks}; default the fibres of phi")
    p.add_argument("--max-k", type=int, default=1)
    p.add_argument("--max-level", type=int, default=None)
    p.add_argument("--out")

    fr = groups.add_parser("fraisse", help="JEP, amalgamation, chains").add_subparsers(
        dest="cmd", required=True)
    p = sub(fr, "jep", cmd_fraisse_jep, "joint embedding by product")
    p.add_argument("--x", required=True, help="cycle type (e.g. 2,3) or system JSON file")
    p.add_argument("--y", required=True)
    p.add_argument("--out")
    p = sub(fr, "amalgamate", cmd_fraisse_amalgamate, "amalgamate a problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--out")
    p = sub(fr, "chain", cmd_fraisse_chain, "build a generic chain")
    p.add_argument("--schedule", default="2,3")
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--out")
    p = sub(fr, "certify", cmd_fraisse_certify, "periodic vs wandering certificate")
    p.add_argument("--chain", required=True)
    p.add_argument("--spiral-depth", type=int, default=2)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else OK
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
    except PreconditionError as exc:
        print(f"error: precondition failed: {exc}", file=sys.stderr)
    except DynamicsError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
