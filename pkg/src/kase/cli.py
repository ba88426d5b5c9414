"""``kase`` command line: one subcommand per role and step.

Exit codes: 0 success, 1 other toolkit error, 2 usage, 3 parameter,
4 document index, 5 scope, 6 protocol, 7 audit, 8 malformed input.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path

from . import bench, codec, first, lab
from . import main_scheme as ms
from .errors import FormatError, KaseError, ParameterError
from .harness import (
    AidHalf,
    AidServer,
    Deployment,
    FirstServer,
    IndexStore,
    MainHalf,
    MainServer,
    SocketEndpoint,
    SocketServer,
    new_query_id,
    search_first,
    search_main,
)
from .scheme import encrypt, extract, keygen, setup

log = logging.getLogger("kase")


def _rng(seed: int | None) -> random.Random | None:
    """Seeded generator for reproducible runs; None means the OS CSPRNG."""
    return None if seed is None else random.Random(seed)


def _doc_list(text: str) -> list[int]:
    """``1,3,5`` or ``2-6`` or a mix."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad document list {text!r}") from None
    return out


def _int_list(text: str) -> list[int]:
    """``10,20,40`` or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (int(x) for x in text.split(":"))
            return list(range(start, stop + 1, step))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def _address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    try:
        return host or "127.0.0.1", int(port)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}") from None


def _emit(obj: dict, out: str | None) -> None:
    text = codec.dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_params(path: str):
    return codec.params_from_json(codec.read_json(path))


def _read_corpus(path: str) -> list[tuple[int, str]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError("expected 'doc_index<TAB>keyword'", f"{path}:{lineno}")
        try:
            i = int(parts[0])
        except ValueError:
            raise FormatError("document index is not an integer", f"{path}:{lineno}") from None
        keyword = parts[1].strip()
        if not keyword:
            raise FormatError("empty keyword", f"{path}:{lineno}")
        rows.append((i, keyword))
    return rows


# ---------------------------------------------------------------------------
# subcommands

def cmd_setup(args) -> int:
    params = setup(args.n, _rng(args.seed))
    _emit(codec.params_to_json(params, args.construction), args.out)
    print(params.trusted_setup_warning, file=sys.stderr)
    return 0


def cmd_keygen(args) -> int:
    params = _load_params(args.params)
    sk = keygen(params, _rng(args.seed))
    _emit(codec.secret_key_to_json(sk, params), args.out)
    return 0


def cmd_encrypt(args) -> int:
    params = _load_params(args.params)
    sk = codec.secret_key_from_json(codec.read_json(args.key))
    rng = _rng(args.seed)
    store = IndexStore.load(args.store, params) if args.append else IndexStore(params)
    per_doc: dict[int, list] = {}
    for i, w in _read_corpus(args.corpus):
        per_doc.setdefault(i, []).append(encrypt(params, sk, i, w, rng))
    for i in sorted(per_doc):
        store.upload(i, per_doc[i])
    store.save(args.store)
    log.info("stored %d encrypted keywords for %d documents", len(store), len(store.doc_indexes()))
    return 0


def cmd_extract(args) -> int:
    params = _load_params(args.params)
    sk = codec.secret_key_from_json(codec.read_json(args.key))
    agg = extract(params, sk, args.docs)
    _emit(codec.aggregate_key_to_json(agg, args.docs, params), args.out)
    return 0


def _scope_warning(claimed, key_docs) -> None:
    outside = sorted(set(claimed) - set(key_docs))
    if outside:
        print(f"scope warning: documents {outside} are not covered by the aggregate key "
              "and cannot match", file=sys.stderr)


def cmd_trapdoor(args) -> int:
    params = _load_params(args.params)
    agg, key_docs = codec.aggregate_key_from_json(codec.read_json(args.agg))
    docs = args.docs if args.docs is not None else key_docs
    _scope_warning(docs, key_docs)
    if args.construction == "first":
        if not args.out:
            raise ParameterError("--out is required for a first-construction trapdoor")
        td = first.trapdoor(params, agg, docs, args.keyword)
        codec.write_json(args.out, codec.trapdoor_first_to_json(td, docs, params, key_docs))
        return 0
    if not (args.out_main and args.out_aid):
        raise ParameterError("--out-main and --out-aid are required for a main-construction trapdoor")
    bundle = ms.trapdoor_main(params, agg, docs, args.keyword, _rng(args.seed))
    qid = new_query_id()
    codec.write_json(args.out_main,
                     codec.trapdoor_main_half_to_json(qid, bundle.tr, bundle.r_main, docs, params, key_docs))
    codec.write_json(args.out_aid,
                     codec.trapdoor_aid_half_to_json(qid, bundle.r_aid, docs, params, key_docs))
    return 0


def cmd_serve(args) -> int:
    params = _load_params(args.params)
    store = IndexStore.load(args.store, params)
    if args.role == "first":
        role = FirstServer(params, store)
    elif args.role == "main":
        role = MainServer(params, store, timeout=args.timeout)
    else:
        if args.main is None:
            raise ParameterError("--main HOST:PORT is required for the aid role")
        role = AidServer(params, store, SocketEndpoint(args.main, "aid", "main"))
    host, port = args.listen
    server = SocketServer(role, host, port)
    print(f"listening {server.address[0]}:{server.address[1]} role={args.role}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.close()
    return 0


def cmd_search(args) -> int:
    if args.trapdoor:
        obj = codec.read_json(args.trapdoor)
        td, docs = codec.trapdoor_first_from_json(obj)
        key_docs = codec.trapdoor_key_scope(obj)
        if key_docs is not None:
            _scope_warning(docs, key_docs)
        if args.first:
            endpoint = SocketEndpoint(args.first, "user", "first")
            result = list(search_first(endpoint, td, docs).docs)
        else:
            with _local_deployment(args) as dep:
                result = dep.search_first(td, docs)
        construction = "first"
    else:
        if not (args.main_trapdoor and args.aid_trapdoor):
            raise ParameterError("give --trapdoor, or both --main-trapdoor and --aid-trapdoor")
        main_obj = codec.read_json(args.main_trapdoor)
        m = codec.trapdoor_main_half_from_json(main_obj)
        a = codec.trapdoor_aid_half_from_json(codec.read_json(args.aid_trapdoor))
        key_docs = codec.trapdoor_key_scope(main_obj)
        if key_docs is not None:
            _scope_warning(m["S"], key_docs)
        main_half = MainHalf(m["query_id"], tuple(m["S"]), m["tr"], m["r_main"])
        aid_half = AidHalf(a["query_id"], tuple(a["S"]), a["r_aid"])
        if args.main or args.aid:
            if not (args.main and args.aid):
                raise ParameterError("remote two-server search needs both --main and --aid")
            result = list(search_main(SocketEndpoint(args.main, "user", "main"),
                                      SocketEndpoint(args.aid, "user", "aid"), main_half, aid_half).docs)
        else:
            with _local_deployment(args) as dep:
                result = list(search_main(dep.user_to_main, dep.user_to_aid, main_half, aid_half).docs)
        construction = "main"
    _emit({"construction": construction, "docs": result}, args.out)
    return 0


def _local_deployment(args) -> Deployment:
    if not (args.params and args.store):
        raise ParameterError("local search needs --params and --store (or give server addresses)")
    params = _load_params(args.params)
    return Deployment(params, IndexStore.load(args.store, params))


def cmd_attack(args) -> int:
    rng = _rng(args.seed) or random.Random()
    if args.game == "keyword-privacy":
        report = lab.run_keyword_privacy_game(args.scheme, args.n, args.trials,
                                              args.adversary or "ratio", rng).to_json()
    elif args.game == "trapdoor-privacy":
        report = lab.run_trapdoor_privacy_game(args.scheme, args.n, args.trials,
                                               args.adversary or "extraction", rng).to_json()
    else:
        u = lab.check_unforgeability_operational(args.scheme, args.n, args.trials, rng)
        forged = u.trials * 2 + u.combined_trials
        wins = forged - (u.outside_false + u.relabel_false + u.combined_false)
        report = {
            "game": "aggregate-key-unforgeability",
            "N": forged,
            "wins": wins,
            "advantage": wins / forged,
            "ci": 3 * (0.25 / forged) ** 0.5,
            "verdict": "holds" if u.passed else "violated",
            "detail": u.to_json(),
        }
    _emit(report, args.out)
    return 0


def cmd_bench(args) -> int:
    records = bench.bench_sweep(args.algorithm, args.construction, args.values, args.reps, args.warmup,
                                inner=args.inner, rng=_rng(args.seed))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            bench.write_csv(records, fh)
    else:
        bench.write_csv(records, sys.stdout)
    return 0


def cmd_size_report(args) -> int:
    records = bench.size_report(args.n, _rng(args.seed))
    _emit({"format": codec.FORMAT, "kind": "size-report", "records": [r.to_json() for r in records]}, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kase", description="Key-aggregate searchable encryption toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, help="deterministic randomness, for tests and demos only")

    sp = sub.add_parser("setup", help="generate public parameters (trusted setup)")
    sp.add_argument("--n", type=int, required=True, help="maximum number of documents")
    sp.add_argument("--construction", choices=codec.CONSTRUCTIONS, default="main")
    sp.add_argument("--out")
    seeded(sp)
    sp.set_defaults(func=cmd_setup)

    sp = sub.add_parser("keygen", help="generate the data owner's master secret")
    sp.add_argument("--params", required=True)
    sp.add_argument("--out")
    seeded(sp)
    sp.set_defaults(func=cmd_keygen)

    sp = sub.add_parser("encrypt", help="encrypt a doc_index<TAB>keyword corpus into a store snapshot")
    sp.add_argument("--params", required=True)
    sp.add_argument("--key", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--store", required=True, help="snapshot file to write")
    sp.add_argument("--append", action="store_true", help="add to an existing snapshot")
    seeded(sp)
    sp.set_defaults(func=cmd_encrypt)

    sp = sub.add_parser("extract", help="derive an aggregate key for a document set")
    sp.add_argument("--params", required=True)
    sp.add_argument("--key", required=True)
    sp.add_argument("--docs", type=_doc_list, required=True, help="e.g. 1,3,5-8")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("trapdoor", help="build a search trapdoor from an aggregate key")
    sp.add_argument("--params", required=True)
    sp.add_argument("--agg", required=True)
    sp.add_argument("--keyword", required=True)
    sp.add_argument("--construction", choices=codec.CONSTRUCTIONS, default="main")
    sp.add_argument("--docs", type=_doc_list, help="documents to search (default: the key's set)")
    sp.add_argument("--out", help="first construction: trapdoor file")
    sp.add_argument("--out-main", help="main construction: half for C_main")
    sp.add_argument("--out-aid", help="main construction: half for C_aid")
    seeded(sp)
    sp.set_defaults(func=cmd_trapdoor)

    sp = sub.add_parser("serve", help="run one server role on a TCP port")
    sp.add_argument("--role", choices=("first", "main", "aid"), required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--store", required=True)
    sp.add_argument("--listen", type=_address, default=("127.0.0.1", 0))
    sp.add_argument("--main", type=_address, help="aid role: address of C_main")
    sp.add_argument("--timeout", type=float, default=5.0, help="main role: seconds to wait for the aid batch")
    sp.set_defaults(func=cmd_serve)

    sp = sub.add_parser("search", help="search with a trapdoor, locally or against running servers")
    sp.add_argument("--trapdoor", help="first-construction trapdoor file")
    sp.add_argument("--main-trapdoor")
    sp.add_argument("--aid-trapdoor")
    sp.add_argument("--params")
    sp.add_argument("--store")
    sp.add_argument("--first", type=_address, help="address of a single server")
    sp.add_argument("--main", type=_address, help="address of C_main")
    sp.add_argument("--aid", type=_address, help="address of C_aid")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("attack", help="run a security game and print a JSON report")
    sp.add_argument("game", choices=("keyword-privacy", "trapdoor-privacy", "unforgeability"))
    sp.add_argument("--scheme", choices=sorted(lab.SCHEMES), default="first")
    sp.add_argument("--adversary", help="ratio | extraction | random-guess")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--out")
    seeded(sp)
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("bench", help="time one algorithm over an axis and write CSV")
    sp.add_argument("--algorithm", choices=bench.ALGORITHMS, required=True)
    sp.add_argument("--construction", choices=bench.CONSTRUCTIONS, default="first")
    sp.add_argument("--values", type=_int_list, required=True, help="e.g. 10,20,40 or 100:1000:100")
    sp.add_argument("--reps", type=int, default=bench.MIN_REPS)
    sp.add_argument("--warmup", type=int, default=3)
    sp.add_argument("--inner", type=int, default=1, help="calls per timed repetition")
    sp.add_argument("--out")
    seeded(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("size-report", help="serialized sizes of keys, trapdoors and ciphertexts")
    sp.add_argument("--n", type=_int_list, default=[2, 8, 64, 512])
    sp.add_argument("--out")
    seeded(sp)
    sp.set_defaults(func=cmd_size_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except KaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
