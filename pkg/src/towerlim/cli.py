"""Command line front end: tower files, built-in towers, verdict reports.

Tower file format (JSON, ``"format": 1``)::

    {"format": 1,
     "base": "wedge" | "tower-complete" | "countable-pi1",
     "stationary": true,
     "horizon": 8,
     "levels": [
       {"rank": 2, "kind": "free",
        "subgroup": {"generators": ["x1 x1", "x2"]}
                  | {"kernel-to": {"type": "Z/2^2", "images": [[1,0],[0,1]]}}
                  | {"lattice": [[2,0],[0,2]]}
                  | {"grid-cocycle": 3},
        "bond": "deletion" | "identity"
              | {"images": ["x1", "x1 x2"]}     (free levels: one word per generator)
              | {"images": [[1,0],[0,2]]}       (abelian levels: one column per generator)
       }, ...]}

``stationary: true`` declares that the displayed level pattern persists
beyond the listed levels; certified verdicts about non-stabilizing
chains require it.  Exit codes of ``check``: 0 Connected, 2
Disconnected, 3 Unknown, 1 input error.

Folded core graphs are cached between runs, keyed by the generator
lists, under ``$TOWERLIM_CACHE_DIR`` (default ``~/.cache/towerlim``).
Cache writes go through a temp file and an atomic rename.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import tempfile
from pathlib import Path

from . import abtower, examples, hegfactor, stallings, towers, words
from .abtower import Lattice
from .towers import (AbelianKernel, BaseMode, CoveringTower, FreeGens,
                     GridCocycle, LatticeSub, LevelSpec, DEFAULT_HORIZON)
from .words import Word

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DISCONNECTED = 2
EXIT_UNKNOWN = 3

_STATUS_EXIT = {
    towers.Connectivity.CONNECTED: EXIT_OK,
    towers.Connectivity.DISCONNECTED: EXIT_DISCONNECTED,
    towers.Connectivity.UNKNOWN: EXIT_UNKNOWN,
}


# --- core graph cache --------------------------------------------------------


class FileCoreCache:
    """Content-addressed store of folded core graphs."""

    def __init__(self, directory: Path):
        self.directory = directory
        directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        digest = hashlib.sha256(key.encode()).hexdigest()
        return self.directory / f"{digest}.core"

    def load(self, key: str) -> str | None:
        path = self._path(key)
        try:
            return path.read_text()
        except OSError:
            return None

    def store(self, key: str, value: str) -> None:
        path = self._path(key)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as handle:
                handle.write(value)
            os.replace(tmp, path)
        except OSError:
            try:
                os.unlink(tmp)
            except OSError:
                pass


def default_cache_dir() -> Path:
    env = os.environ.get("TOWERLIM_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "towerlim"


# --- tower file parsing ---------------------------------------------------------

_TARGET_RE = re.compile(r"^Z(?:/(\d+))?(?:\^(\d+))?$")

_BASE_NAMES = {mode.value: mode for mode in BaseMode}


class TowerFileError(ValueError):
    pass


def _parse_target(text: str) -> tuple[int, int]:
    m = _TARGET_RE.fullmatch(text.strip())
    if m is None:
        raise TowerFileError(f"bad kernel target {text!r} (expected like 'Z^3' or 'Z/2^5')")
    modulus = int(m.group(1)) if m.group(1) else 0
    k = int(m.group(2)) if m.group(2) else 1
    return modulus, k


def _parse_subgroup(spec: dict, rank: int, kind: str) -> towers.Subgroup:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise TowerFileError("subgroup must be a one-key object")
    key, value = next(iter(spec.items()))
    if key == "generators":
        return FreeGens(tuple(words.word(t, rank) for t in value))
    if key == "kernel-to":
        modulus, k = _parse_target(value["type"])
        images = value["images"]
        if len(images) != rank:
            raise TowerFileError(f"kernel-to needs one image per generator ({rank}), got {len(images)}")
        if any(len(col) != k for col in images):
            raise TowerFileError(f"kernel-to image vectors must have length {k}")
        matrix = tuple(tuple(int(images[c][r]) for c in range(rank)) for r in range(k))
        return AbelianKernel(matrix, modulus)
    if key == "lattice":
        return LatticeSub(Lattice.from_vectors(rank, [list(map(int, row)) for row in value]))
    if key == "grid-cocycle":
        return GridCocycle(int(value))
    raise TowerFileError(f"unknown subgroup kind {key!r}")


def _parse_bond(spec, rank: int, prev_rank: int, kind: str):
    if spec == "deletion":
        if kind == "free":
            return words.deletion(rank, prev_rank)
        return towers.deletion_matrix(rank, prev_rank)
    if spec == "identity":
        if rank != prev_rank:
            raise TowerFileError("identity bond between different ranks")
        if kind == "free":
            return words.identity_hom(rank)
        return abtower.identity_matrix(rank)
    if isinstance(spec, dict) and set(spec) == {"images"}:
        images = spec["images"]
        if len(images) != rank:
            raise TowerFileError(f"bond needs one image per generator ({rank})")
        if kind == "free":
            return words.FreeHom(rank, prev_rank,
                                 tuple(words.word(t, prev_rank) for t in images))
        if any(len(col) != prev_rank for col in images):
            raise TowerFileError(f"bond image vectors must have length {prev_rank}")
        return tuple(tuple(int(images[c][r]) for c in range(rank)) for r in range(prev_rank))
    raise TowerFileError(f"unknown bond spec {spec!r}")


def parse_tower(doc: dict, name: str = "") -> tuple[CoveringTower, int | None]:
    """Parse a tower document; returns the tower and its declared horizon."""
    if doc.get("format") != 1:
        raise TowerFileError("missing or unsupported 'format' (expected 1)")
    base = _BASE_NAMES.get(doc.get("base"))
    if base is None:
        raise TowerFileError(f"unknown base mode {doc.get('base')!r}")
    stationary = bool(doc.get("stationary", False))
    declared_horizon = doc.get("horizon")
    levels_doc = doc.get("levels")
    if not isinstance(levels_doc, list) or not levels_doc:
        raise TowerFileError("tower needs a nonempty 'levels' list")
    levels = []
    prev_rank = None
    for i, ld in enumerate(levels_doc):
        rank = int(ld["rank"])
        kind = ld.get("kind", "free")
        subgroup = _parse_subgroup(ld["subgroup"], rank, kind)
        bond = None
        if i > 0:
            bond = _parse_bond(ld.get("bond", "deletion"), rank, prev_rank, kind)
        levels.append(LevelSpec(rank, kind, subgroup, bond))
        prev_rank = rank
    tower = CoveringTower(base, tuple(levels), stationary=stationary, name=name)
    return tower, declared_horizon


def tower_to_doc(tower: CoveringTower, horizon: int | None = None) -> dict:
    levels = []
    for i, lv in enumerate(tower.levels):
        sub = lv.subgroup
        if isinstance(sub, FreeGens):
            sub_doc = {"generators": [str(g) for g in sub.generators]}
        elif isinstance(sub, AbelianKernel):
            k = len(sub.images)
            target = f"Z^{k}" if sub.modulus == 0 else f"Z/{sub.modulus}^{k}"
            images = [[sub.images[r][c] for r in range(k)] for c in range(lv.rank)]
            sub_doc = {"kernel-to": {"type": target, "images": images}}
        elif isinstance(sub, LatticeSub):
            sub_doc = {"lattice": [list(row) for row in sub.lattice.rows]}
        else:
            assert isinstance(sub, GridCocycle)
            sub_doc = {"grid-cocycle": sub.vanish}
        level_doc = {"rank": lv.rank, "kind": lv.kind, "subgroup": sub_doc}
        if i > 0:
            prev_rank = tower.levels[i - 1].rank
            bond = lv.bond
            if lv.kind == "free":
                if bond == words.deletion(lv.rank, prev_rank):
                    level_doc["bond"] = "deletion"
                elif bond == words.identity_hom(lv.rank):
                    level_doc["bond"] = "identity"
                else:
                    level_doc["bond"] = {"images": [str(w) for w in bond.images]}
            else:
                if bond == towers.deletion_matrix(lv.rank, prev_rank):
                    level_doc["bond"] = "deletion"
                elif bond == abtower.identity_matrix(lv.rank):
                    level_doc["bond"] = "identity"
                else:
                    level_doc["bond"] = {"images": [[bond[r][c] for r in range(prev_rank)]
                                                    for c in range(lv.rank)]}
        levels.append(level_doc)
    doc = {"format": 1, "base": tower.base.value, "stationary": tower.stationary,
           "levels": levels}
    if horizon is not None:
        doc["horizon"] = horizon
    return doc


def load_tower(spec: str, horizon: int | None) -> tuple[CoveringTower, int]:
    """Resolve a path or builtin name; returns the tower and effective horizon."""
    path = Path(spec)
    if path.exists():
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise TowerFileError(f"{spec}: not valid JSON: {exc}") from exc
        tower, declared = parse_tower(doc, name=path.stem)
        h = horizon if horizon is not None else (declared if declared is not None
                                                 else len(tower.levels))
        return tower, min(h, len(tower.levels))
    try:
        builtin = examples.get_builtin(spec)
    except KeyError:
        raise TowerFileError(f"{spec}: no such file and no builtin tower of that name")
    h = horizon if horizon is not None else DEFAULT_HORIZON
    return builtin.build(h), h


# --- subcommands ------------------------------------------------------------------


def _cmd_check(args) -> int:
    try:
        tower, horizon = load_tower(args.tower, args.horizon)
    except TowerFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    cache = None
    if not args.no_cache:
        cache_dir = Path(args.cache_dir) if args.cache_dir else default_cache_dir()
        cache = FileCoreCache(cache_dir)
    stallings.install_cache(cache)
    try:
        violations = towers.validate_tower(tower)
        fatal = [v for v in violations if v.fatal]
        if fatal:
            for v in fatal:
                print(f"error: level {v.level}: [{v.code}] {v.message}", file=sys.stderr)
            return EXIT_INPUT
        verdict = towers.connectivity_verdict(tower, horizon)
        print(f"TOWER: {tower.name or args.tower}")
        print(f"HORIZON: {verdict.horizon}")
        print(f"STATUS: {verdict.status.value}")
        for tag, detail in verdict.rules:
            print(f"RULE: {tag} -- {detail}")
        for w in verdict.witnesses:
            if w:
                print(f"WITNESS: {w}")
        for v in violations:
            if not v.fatal:
                print(f"NOTE: level {v.level}: {v.message}")
        if args.pi1:
            report = towers.pi1_of_limit(tower, horizon)
            print(f"PI1: {report.kind} -- {report.text}")
            for line in report.level_lines:
                print(f"PI1: {line}")
        return _STATUS_EXIT[verdict.status]
    finally:
        stallings.install_cache(None)


def _cmd_examples(args) -> int:
    for b in examples.BUILTINS:
        print(f"{b.name}: {b.description}")
    if args.write:
        out_dir = Path(args.write)
        out_dir.mkdir(parents=True, exist_ok=True)
        h = args.horizon if args.horizon is not None else DEFAULT_HORIZON
        for b in examples.BUILTINS:
            doc = tower_to_doc(b.build(h), horizon=h)
            path = out_dir / f"{b.name}.json"
            path.write_text(json.dumps(doc, indent=2) + "\n")
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_core(args) -> int:
    try:
        gens = [words.word(t, args.rank) for t in args.words]
        core = stallings.core_from_generators(gens, args.rank)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    index = core.index()
    print(f"VERTICES: {core.num_vertices}")
    print(f"EDGES: {len(core.edges)}")
    print(f"SUBGROUP-RANK: {core.subgroup_rank()}")
    print(f"INDEX: {'infinite' if index is None else index}")
    print(f"ENCODING: {core.encode()}")
    return EXIT_OK


def _cmd_member(args) -> int:
    try:
        if args.subgroup in ("derived", "derived2") and not args.gen:
            w = words.word(args.word, args.rank)
            if args.subgroup == "derived":
                result = words.in_first_derived(w)
            else:
                result = words.in_second_derived(w)
                assert result == words.fox_second_derived(w)
        else:
            gen_texts = list(args.gen)
            if args.subgroup not in (None, "derived", "derived2"):
                gen_texts.insert(0, args.subgroup)
            if not gen_texts:
                print("error: no subgroup given", file=sys.stderr)
                return EXIT_INPUT
            rank = args.rank
            if rank is None:
                rank = max(words.word(t).rank for t in gen_texts + [args.word])
            gens = [words.word(t, rank) for t in gen_texts]
            w = words.word(args.word, rank)
            result = stallings.core_from_generators(gens, rank).contains(w)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print("true" if result else "false")
    return EXIT_OK


def _cmd_factor(args) -> int:
    try:
        lines = [ln.strip() for ln in Path(args.path).read_text().splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        seq = hegfactor.CoherentWordSeq(
            tuple(words.word(ln, i + 1) for i, ln in enumerate(lines)))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    bad = hegfactor.validate_coherent(seq)
    if bad:
        print(f"error: sequence is not coherent at level(s) {bad}", file=sys.stderr)
        return EXIT_INPUT
    tail, kernel = hegfactor.factor_tail_kernel(seq)
    print(f"PROFILE: {' '.join(map(str, tail.exponents))}")
    print(f"G: {tail}")
    for i, k in enumerate(kernel.levels):
        print(f"K[{i + 1}]: {k}")
    print("CERT: kernel part has zero exponent vector at every level")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="towerlim",
        description="decide path-connectivity of inverse limits of covering towers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="verdict for a tower file or builtin name")
    p_check.add_argument("tower", help="path to a tower JSON file, or a builtin name")
    p_check.add_argument("--horizon", type=int, default=None,
                         help=f"levels to examine (builtins default to {DEFAULT_HORIZON})")
    p_check.add_argument("--pi1", action="store_true",
                         help="also report the fundamental group of the limit")
    p_check.add_argument("--cache-dir", default=None, help="core graph cache directory")
    p_check.add_argument("--no-cache", action="store_true", help="disable the core graph cache")
    p_check.set_defaults(func=_cmd_check)

    p_examples = sub.add_parser("examples", help="list the builtin towers")
    p_examples.add_argument("--write", metavar="DIR", default=None,
                            help="also write each builtin as a JSON tower file")
    p_examples.add_argument("--horizon", type=int, default=None,
                            help="horizon for written files")
    p_examples.set_defaults(func=_cmd_examples)

    p_core = sub.add_parser("core", help="fold a subgroup's core graph")
    p_core.add_argument("words", nargs="*", help="generator words")
    p_core.add_argument("--rank", type=int, required=True, help="ambient rank")
    p_core.set_defaults(func=_cmd_core)

    p_member = sub.add_parser("member", help="subgroup membership of a word")
    p_member.add_argument("word", help="the word to test")
    p_member.add_argument("--subgroup", default=None,
                          help="'derived', 'derived2', or a generator word")
    p_member.add_argument("--gen", action="append", default=[],
                          help="additional subgroup generators (repeatable)")
    p_member.add_argument("--rank", type=int, default=None, help="ambient rank")
    p_member.set_defaults(func=_cmd_member)

    p_factor = sub.add_parser("factor",
                              help="split a coherent word sequence into tail word times "
                                   "exponent-free part")
    p_factor.add_argument("path", help="file with one word per line (line i lives in rank i)")
    p_factor.set_defaults(func=_cmd_factor)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
