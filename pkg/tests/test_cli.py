import json
import subprocess
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from numtok import ntke
from numtok.bench import extract_answer
from numtok.cli import main
from numtok.taskgen import read_dataset


def run_cli(*argv) -> int:
    return main(list(argv))


def test_gen_line_count(tmp_path):
    out = tmp_path / "add.jsonl"
    assert run_cli("gen", "--task", "add", "--n", "50", "--seed", "42", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 51
    header = json.loads(lines[0])
    assert header["task"] == "meta" and header["seed"] == 42


def test_gen_deterministic_and_shard_invariant(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.jsonl", "b.jsonl", "c.jsonl"))
    run_cli("gen", "--task", "mult", "--n", "40", "--seed", "7", "--out", str(a))
    run_cli("gen", "--task", "mult", "--n", "40", "--seed", "7", "--out", str(b))
    run_cli("gen", "--task", "mult", "--n", "40", "--seed", "7", "--out", str(c), "--shards", "4")
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_encode_decode_roundtrip(tmp_path):
    nums = tmp_path / "nums.txt"
    nums.write_text("1.5\n-0.25\n1000000\n0.0000001234\n")
    enc = tmp_path / "e.ntke"
    dec = tmp_path / "vals.txt"
    assert run_cli("encode", "--scheme", "bittoken", "--d-model", "768",
                   "--in", str(nums), "--out", str(enc)) == 0
    m = ntke.read_matrix(enc)
    assert m.shape == (4, 768)
    assert run_cli("decode", "--scheme", "bittoken", "--d-model", "768",
                   "--in", str(enc), "--out", str(dec)) == 0
    assert dec.read_text().splitlines() == ["1.5", "-0.25", "1000000", "0.0000001234"]


def test_encode_decode_fone_xval(tmp_path):
    nums = tmp_path / "nums.txt"
    nums.write_text("123.456\n7\n")
    for scheme in ("fone", "xval"):
        enc = tmp_path / f"{scheme}.ntke"
        dec = tmp_path / f"{scheme}.txt"
        assert run_cli("encode", "--scheme", scheme, "--d-model", "128",
                       "--in", str(nums), "--out", str(enc)) == 0
        assert run_cli("decode", "--scheme", scheme, "--d-model", "128",
                       "--in", str(enc), "--out", str(dec)) == 0
        got = [float(x) for x in dec.read_text().splitlines()]
        if scheme == "fone":
            assert got == [123.456, 7.0]
        else:
            assert abs(got[0] - 123.456) / 123.456 < 1e-3  # f32 scalar precision


def test_encode_validation_error(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("not-a-number\n")
    rc = run_cli("encode", "--scheme", "bittoken", "--in", str(bad),
                 "--out", str(tmp_path / "x.ntke"))
    assert rc == 1


def test_missing_file_is_io_error(tmp_path):
    rc = run_cli("score", "--pred", str(tmp_path / "nope.jsonl"),
                 "--ref", str(tmp_path / "nope2.jsonl"))
    assert rc == 2


def test_unknown_flag_is_validation_error():
    assert run_cli("gen", "--task", "add", "--n", "1", "--frobnicate") == 1


def test_parse_subcommand_roundtrip(tmp_path):
    text = "pi is 3.14, -007 grams"
    p1 = subprocess.run(
        [sys.executable, "-m", "numtok", "parse"],
        input=text, capture_output=True, text=True,
    )
    assert p1.returncode == 0
    lines = [json.loads(l) for l in p1.stdout.splitlines()]
    kinds = [l["type"] for l in lines]
    assert kinds[0] == "meta" and "num" in kinds
    p2 = subprocess.run(
        [sys.executable, "-m", "numtok", "parse", "--detokenize"],
        input=p1.stdout, capture_output=True, text=True,
    )
    assert p2.stdout == text


def test_score_self_is_perfect(tmp_path):
    ref = tmp_path / "ref.jsonl"
    run_cli("gen", "--task", "add", "--n", "30", "--seed", "1", "--out", str(ref))
    report_path = tmp_path / "report.json"
    assert run_cli("score", "--pred", str(ref), "--ref", str(ref),
                   "--out", str(report_path)) == 0
    report = json.loads(report_path.read_text())
    assert report["tasks"]["add"]["exact_match_rate"] == 1.0
    assert report["tasks"]["add"]["mean_log_smape"] == 1.0
    assert report["tasks"]["add"]["count"] == 30


def test_score_mixed_tasks_self(tmp_path):
    for task in ("minmax", "sorting", "interval", "div"):
        ref = tmp_path / f"{task}.jsonl"
        run_cli("gen", "--task", task, "--n", "15", "--seed", "3", "--out", str(ref))
        out = tmp_path / f"{task}_report.json"
        assert run_cli("score", "--pred", str(ref), "--ref", str(ref), "--out", str(out)) == 0
        report = json.loads(out.read_text())
        assert report["tasks"][task]["exact_match_rate"] == 1.0


def test_score_count_mismatch(tmp_path):
    ref = tmp_path / "ref.jsonl"
    run_cli("gen", "--task", "add", "--n", "5", "--seed", "1", "--out", str(ref))
    pred = tmp_path / "pred.jsonl"
    pred.write_text('{"answer": "1"}\n')
    assert run_cli("score", "--pred", str(pred), "--ref", str(ref)) == 1


def test_curriculum_sim(tmp_path):
    cfg = {
        "tasks": ["mult", "div"],
        "delta_max": {"mult": 10, "div": 8},
        "steps": 50,
        "batch_tokens": 256,
        "lr": 0.001,
        "lr_max": 0.02,
        "S": 25,
        "L": 0.01,
        "performance": {"type": "ramp", "rate": 0.02},
    }
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "plan.jsonl"
    state_out = tmp_path / "state.json"
    assert run_cli("curriculum-sim", "--sim-config", str(cfg_path),
                   "--out", str(out), "--state-out", str(state_out)) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(lines) == 50
    for line in lines:
        assert abs(sum(line["ratios"].values()) - 1.0) < 1e-9
        assert sum(c for _, _, c in line["plan"]) == 256
    frontiers = [l["frontiers"]["mult"] for l in lines]
    assert all(b >= a for a, b in zip(frontiers, frontiers[1:]))
    # state checkpoint reloads
    from numtok.curriculum import SchedulerState

    st = SchedulerState.from_json(state_out.read_text())
    assert set(st.tasks) == {"mult", "div"}


def test_curriculum_sim_table_reproduces_hand_example(tmp_path):
    cfg = {
        "tasks": ["a", "b"],
        "delta_max": {"a": 1, "b": 1},
        "steps": 1,
        "batch_tokens": 64,
        "lr": 0.0,
        "lr_max": 1.0,
        "S": 1,
        "L": 1,
        "alpha": 0.5,
        "lambda": -1.0,
        "initial_ratios": {"a": 0.5, "b": 0.5},
        "performance": {"type": "table", "perfs": [{"a": 0.5, "b": 1.0}]},
    }
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "plan.jsonl"
    assert run_cli("curriculum-sim", "--sim-config", str(cfg_path), "--out", str(out)) == 0
    line = json.loads(out.read_text().splitlines()[0])
    assert abs(line["ratios"]["a"] - 0.75) < 1e-12
    assert abs(line["ratios"]["b"] - 0.25) < 1e-12


def test_probe_noise_cli(tmp_path):
    out = tmp_path / "noise.json"
    assert run_cli("probe", "--kind", "noise", "--scheme", "bittoken",
                   "--sigmas", "0.0,0.4", "--n", "200", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["curve"]["0.0"] == 1.0
    assert doc["curve"]["0.4"] == 1.0


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5}))
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    run_cli("--config", str(cfg), "gen", "--task", "add", "--n", "3", "--out", str(a))
    run_cli("gen", "--task", "add", "--n", "3", "--seed", "5", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_env_beats_config(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5}))
    monkeypatch.setenv("NUMTOK_SEED", "9")
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    run_cli("--config", str(cfg), "gen", "--task", "add", "--n", "3", "--out", str(a))
    monkeypatch.delenv("NUMTOK_SEED")
    run_cli("gen", "--task", "add", "--n", "3", "--seed", "9", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# bench-run against a mock endpoint


class MockChatHandler(BaseHTTPRequestHandler):
    answers: dict[str, str] = {}
    mode = "echo"

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        user = body["messages"][1]["content"]
        if self.mode == "echo":
            content = json.dumps({"answer": self.answers.get(user, "?")})
        elif self.mode == "fenced":
            content = "Sure!\n```json\n" + json.dumps({"answer": self.answers.get(user, "?")}) + "\n```"
        out = {
            "choices": [{"message": {"role": "assistant", "content": content}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 5},
        }
        payload = json.dumps(out).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *a):
        pass


@pytest.fixture
def mock_endpoint(tmp_path):
    server = HTTPServer(("127.0.0.1", 0), MockChatHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()


def test_bench_run_end_to_end(tmp_path, mock_endpoint):
    ref = tmp_path / "ref.jsonl"
    run_cli("gen", "--task", "add", "--n", "8", "--seed", "2", "--out", str(ref))
    _, problems = read_dataset(ref)
    MockChatHandler.answers = {p.question: p.answer for p in problems}
    MockChatHandler.mode = "echo"
    preds = tmp_path / "preds.jsonl"
    assert run_cli("bench-run", "--dataset", str(ref), "--endpoint", mock_endpoint,
                   "--model", "mock-1", "--out", str(preds)) == 0
    report_path = tmp_path / "report.json"
    assert run_cli("score", "--pred", str(preds), "--ref", str(ref),
                   "--out", str(report_path)) == 0
    report = json.loads(report_path.read_text())
    assert report["tasks"]["add"]["exact_match_rate"] == 1.0


def test_bench_run_fenced_answers(tmp_path, mock_endpoint):
    ref = tmp_path / "ref.jsonl"
    run_cli("gen", "--task", "mult", "--n", "4", "--seed", "2", "--out", str(ref))
    _, problems = read_dataset(ref)
    MockChatHandler.answers = {p.question: p.answer for p in problems}
    MockChatHandler.mode = "fenced"
    preds = tmp_path / "preds.jsonl"
    assert run_cli("bench-run", "--dataset", str(ref), "--endpoint", mock_endpoint,
                   "--model", "mock-1", "--out", str(preds)) == 0
    rows = [json.loads(l) for l in preds.read_text().splitlines()]
    assert all(r["error"] is None for r in rows)
    assert [r["answer"] for r in rows] == [p.answer for p in problems]


def test_bench_run_unreachable_endpoint_records_failures(tmp_path):
    ref = tmp_path / "ref.jsonl"
    run_cli("gen", "--task", "add", "--n", "2", "--seed", "2", "--out", str(ref))
    preds = tmp_path / "preds.jsonl"
    rc = run_cli("bench-run", "--dataset", str(ref),
                 "--endpoint", "http://127.0.0.1:1/nope", "--model", "m",
                 "--max-retries", "0", "--timeout", "2", "--out", str(preds))
    assert rc == 0  # per-item failures are recorded, not fatal
    rows = [json.loads(l) for l in preds.read_text().splitlines()]
    assert len(rows) == 2
    assert all(r["error"] for r in rows)


def test_extract_answer_variants():
    assert extract_answer('{"answer": 5}') == "5"
    assert extract_answer('```json\n{"answer": "5"}\n```') == "5"
    assert extract_answer('the result is {"answer": -2.5} ok?') == "-2.5"
    assert extract_answer('{"answer": [1, 2]}') == "[1, 2]"
    assert extract_answer('"answer": 7e3,') == "7e3"
    assert extract_answer("no json here") is None
