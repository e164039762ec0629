#!/usr/bin/env python3
"""Smoke test for the loadbal_py extension module.

Build it first:  cargo build -p loadbal-py --release
Then run:        python3 python/smoke_test.py
"""

import json
import pathlib
import shutil
import sys
import sysconfig


def locate_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    for profile in ("release", "debug"):
        built = root / "target" / profile / "libloadbal_py.so"
        if built.exists():
            target = built.parent / f"loadbal_py{suffix}"
            if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
                shutil.copy2(built, target)
            sys.path.insert(0, str(built.parent))
            return
    sys.exit("libloadbal_py.so not found; run `cargo build -p loadbal-py` first")


locate_module()
import loadbal_py  # noqa: E402


def main():
    # the worked three-machine example
    inst = loadbal_py.Instance(["1", "2", "4"], ["6", "4", "1", "0.6"])
    assert inst.num_machines == 3 and inst.num_jobs == 4
    assert inst.sizes == ["6", "4", "1", "3/5"]

    trace = json.loads(loadbal_py.run(inst, "ppr"))
    chosen = [step["chosen"] for step in trace["steps"]]
    assert chosen == [2, 2, 1, 1], chosen
    assert trace["steps"][3]["prices"] == ["5/4", "1", "0"]
    assert trace["alg_makespan_announced"] == "5/2"

    assert loadbal_py.alg_makespan(inst, "ppr") == 2.5

    best = json.loads(loadbal_py.opt(inst))
    assert best["value"] == "2" and best["exact"] is True

    report = json.loads(loadbal_py.verify(inst, "wb-strong"))
    assert report["verdict"] == "pass"

    # JSON round trip
    again = loadbal_py.Instance.from_json(inst.to_json())
    assert again.speeds == inst.speeds and again.sizes == inst.sizes

    # the greedy counterexample family is flagged as not well-behaved
    bad = loadbal_py.Instance.generate("greedy-counter", eps="1/4")
    report = json.loads(loadbal_py.verify(bad, "wb-weak", "greedy-true"))
    assert report["verdict"] == "fail" and report["counterexample"]

    # generated instances are reproducible from the seed
    a = loadbal_py.Instance.generate("random", m=3, n=5, seed=7)
    b = loadbal_py.Instance.generate("random", m=3, n=5, seed=7)
    assert a.to_json() == b.to_json()

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
