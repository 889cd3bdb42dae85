"""Smoke test for the minebench_py extension module.

Build the module first (`cargo build --release -p minebench-py`), then run
`python3 python/smoke_test.py`. If minebench_py is not importable, the
script loads the shared library straight from target/.
"""

import glob
import importlib.util
import json
import os
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    try:
        import minebench_py

        return minebench_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for path in glob.glob(os.path.join(ROOT, "target", profile, "libminebench_py.*")):
            if path.endswith((".so", ".dylib", ".pyd")):
                spec = importlib.util.spec_from_file_location("minebench_py", path)
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                sys.modules["minebench_py"] = module
                return module
    raise SystemExit("minebench_py not found; run `cargo build -p minebench-py` first")


# Mines at (1,2), (2,1), (2,2): (1,1) is safe but walled in.
FIELD = "5 5\n1 2\n2 1\n2 2\n"


def check_game(mb):
    g = mb.Game(FIELD)
    assert (g.rows, g.cols, g.mine_count) == (5, 5, 3)
    assert g.first_action == "L(3,3)"
    assert g.status == {"state": "in_progress"}

    fb = g.apply("L(3,3)")
    assert fb["type"] == "board_updated", fb
    assert fb["revealed"] == [{"row": 3, "col": 3}], fb
    assert g.cells()[2][2] == "1"

    again = g.apply("L(3,3)")
    assert again["type"] == "invalid" and again["message"], again

    g.apply("L(5,5)")
    for fmt in ("table", "coordinate"):
        for symbols in ("default", "roman"):
            text = g.render(format=fmt, symbols=symbols)
            assert mb.parse_board(text, format=fmt, symbols=symbols) == g.cells(), (fmt, symbols)
    assert mb.parse_board(g.render(indices=False), indices=False) == g.cells()

    assert g.apply("L(1,1)")["type"] == "game_solved"
    assert g.is_over and g.status == {"state": "solved"}
    assert g.history().splitlines() == ["1. L(3,3)", "2. L(3,3)", "3. L(5,5)", "4. L(1,1)"]
    try:
        g.apply("R(4,4)")
    except RuntimeError:
        pass
    else:
        raise AssertionError("a finished game accepted an action")
    try:
        g.apply("X(1,1)")
    except ValueError:
        pass
    else:
        raise AssertionError("a malformed action was accepted")

    lost = mb.Game(FIELD)
    lost.apply("L(3,3)")
    fb = lost.apply("L(2,2)")
    assert fb == {"type": "game_failed", "cause": {"cause": "mine_triggered", "at": {"row": 2, "col": 2}}}, fb

    r = mb.Game.generate(9, 9, 10, seed=3, safe=[(5, 5)])
    assert r.mine_count == 10 and r.apply("L(5,5)")["type"] != "game_failed"


def check_runs(mb):
    assert mb.extract_action("thinking...\nACTION: M(2,3)") == "M(2,3)"
    assert mb.extract_action("no action here") is None

    with tempfile.TemporaryDirectory() as tmp:
        ids = mb.generate_suite(os.path.join(tmp, "suite"), pool=200, keep=10, min_reveal=10)
        assert ids == ["board-%03d" % i for i in range(10)]
        logs = os.path.join(tmp, "logs")
        os.mkdir(logs)
        for i, board_id in enumerate(ids):
            with open(os.path.join(tmp, "suite", board_id + ".txt")) as f:
                field = f.read()
            log = mb.play(field, mode="CH", format="coordinate", board_id=board_id)
            assert log["board_id"] == board_id and log["agent"] == "builtin:single-point"
            path = os.path.join(logs, board_id + ".json")
            with open(path, "w") as f:
                json.dump(log, f)
            mb.verify_log(path)
        report = mb.evaluate(logs, label="single-point")
        assert report["n_games"] == 10
        assert report["markdown"].startswith("| Metric | single-point |")

        scripted = mb.play(FIELD, responses=["ACTION: L(5,5)", "ACTION: L(1,1)"])
        assert scripted["outcome"] == "solved", scripted["outcome"]

    fixtures = os.path.join(ROOT, "crates", "core", "tests", "fixtures", "metrics")
    report = mb.evaluate(fixtures)
    assert report["n_games"] == 3
    assert (round(report["pct_solved"], 1), round(report["pct_valid"], 1), round(report["pct_repeated"], 1)) == (
        33.3,
        66.7,
        26.7,
    )


def main():
    mb = load()
    check_game(mb)
    check_runs(mb)
    print("minebench_py %s smoke test passed" % mb.__version__)


if __name__ == "__main__":
    main()
