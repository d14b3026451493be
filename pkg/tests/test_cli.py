import json
import subprocess
import sys
import threading
import urllib.request

import pytest

from lclre.cli import run

BIN = [sys.executable, "-m", "lclre.cli"]


def cli(*args, input_text=None):
    return subprocess.run(BIN + list(args), capture_output=True, text=True,
                          input=input_text)


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("fixtures")
    so = tmp / "so.txt"
    so.write_text("I I O\nI O O\nO O O\n\nI O\n")
    from lclre.catalog import (toy_problem, toy_default_diagram,
                               toy_tweaked_diagram, delta_coloring_fp)
    toy = tmp / "toy.txt"
    toy.write_text(toy_problem().to_text())
    dd = tmp / "toy-default.txt"
    dd.write_text(toy_default_diagram().to_text())
    td = tmp / "toy-tweaked.txt"
    td.write_text(toy_tweaked_diagram().to_text())
    dc3 = tmp / "delta3.txt"
    dc3.write_text(delta_coloring_fp(3).to_text())
    bad = tmp / "bad-diagram.txt"
    bad.write_text("a -> c\nb -> c\n")
    import lclre, pathlib
    ledger = pathlib.Path(lclre.__file__).parent / "data" / "psi_def3col_worked.json"
    return {"so": str(so), "toy": str(toy), "default": str(dd),
            "tweaked": str(td), "delta3": str(dc3), "bad": str(bad),
            "ledger": str(ledger), "tmp": tmp}


class TestCommands:
    def test_parse_roundtrip(self, files):
        r = cli("parse", files["so"])
        assert r.returncode == 0
        assert r.stdout == "I O^2\nI^2 O\nO^3\n\nI O\n"

    def test_parse_json_roundtrips_through_parser(self, files):
        r = cli("parse", "--json", files["so"])
        doc = json.loads(r.stdout)
        from lclre.problems import Problem
        p = Problem.from_json(doc["problem"])
        assert p.alphabet == ("I", "O")

    def test_rere_sinkless_orientation(self, files):
        r = cli("rere", files["so"])
        assert r.returncode == 0
        assert r.stdout == "(I,O)^2 O\n\n(I,O) [(I,O) O]\n"

    def test_check_trivial_exit_codes(self, files):
        # the default-diagram fixed point of the toy problem is trivial
        fp_out = files["tmp"] / "toy-fp.txt"
        r = cli("fixedpoint", files["toy"], files["default"])
        assert r.returncode == 0
        fp_out.write_text("".join(
            line + "\n" for line in r.stdout.splitlines()
            if not line.startswith("#")))
        r2 = cli("check-trivial", str(fp_out))
        assert r2.returncode == 1
        assert "XY^3" in r2.stdout
        r3 = cli("check-trivial", files["so"])
        assert r3.returncode == 0  # sinkless orientation is non-trivial

    def test_check_trivial_nontrivial(self, files):
        r = cli("fixedpoint", files["toy"], files["tweaked"])
        out = files["tmp"] / "toy-fp2.txt"
        out.write_text("".join(
            line + "\n" for line in r.stdout.splitlines()
            if not line.startswith("#")))
        r2 = cli("check-trivial", str(out))
        assert r2.returncode == 0
        assert r2.stdout == "non-trivial\n"

    def test_is_fixedpoint(self, files):
        assert cli("is-fixedpoint", files["delta3"]).returncode == 0
        assert cli("is-fixedpoint", files["so"]).returncode == 1

    def test_default_diagram(self, files):
        r = cli("default-diagram", files["toy"])
        assert r.returncode == 0
        assert "ABXY -> " in r.stdout

    def test_validate_diagram(self, files):
        ok = cli("validate-diagram", files["default"])
        assert ok.returncode == 0 and ok.stdout == "ok\n"
        bad = cli("validate-diagram", files["bad"])
        assert bad.returncode == 1
        assert "no-unique-inf" in bad.stdout

    def test_fixedpoint_provenance_and_trace(self, files):
        prov = files["tmp"] / "prov.json"
        r = cli("fixedpoint", files["toy"], files["default"],
                "--provenance", str(prov), "--json")
        assert r.returncode == 0
        payload = json.loads(r.stdout)
        assert payload["trivial"]["solvable"] is True
        assert payload["trivial"]["witness"] == "XY^3"
        t = cli("trace", str(prov), "XY^3")
        assert t.returncode == 0
        assert "input line" in t.stdout
        missing = cli("trace", str(prov), "ZZZ")
        assert missing.returncode == 2

    def test_verify_psi(self, files):
        r = cli("verify-psi", files["ledger"])
        assert r.returncode == 0
        assert "36 systems, valid" in r.stdout
        j = cli("verify-psi", "--json", files["ledger"])
        doc = json.loads(j.stdout)
        assert doc["all_valid"] is True
        assert doc["entries"][0]["num_systems"] == 36

    def test_catalog(self):
        r = cli("catalog", "list")
        assert "delta-coloring-fp" in r.stdout.split()
        r2 = cli("catalog", "emit", "delta-coloring-fp", "--delta", "3")
        assert r2.returncode == 0 and "123" in r2.stdout
        r3 = cli("catalog", "emit", "def2col-fp", "--diagram")
        assert r3.returncode == 0 and "ABXY+ ->" in r3.stdout
        r4 = cli("catalog", "emit", "def2col-fp")
        assert r4.returncode == 2  # missing --delta

    def test_usage_errors(self, files):
        assert cli("parse", "/nonexistent/problem.txt").returncode == 2
        assert cli("nonsense").returncode == 2

    def test_in_process_run_matches_subprocess(self, files, capsys):
        code = run(["parse", files["so"]])
        out = capsys.readouterr().out
        assert code == 0 and out == "I O^2\nI^2 O\nO^3\n\nI O\n"


class TestDeterminism:
    def test_byte_identical_across_runs(self, files):
        commands = [
            ["parse", files["so"]],
            ["rere", files["so"]],
            ["fixedpoint", files["toy"], files["default"], "--json"],
            ["catalog", "emit", "def3col-fp", "--delta", "5", "--json"],
            ["verify-psi", "--json", files["ledger"]],
        ]
        for cmd in commands:
            outs = {cli(*cmd).stdout for _ in range(3)}
            assert len(outs) == 1, f"nondeterministic output for {cmd}"


@pytest.fixture(scope="module")
def server():
    from lclre.server import make_server
    httpd = make_server(port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}"
    httpd.shutdown()


class TestServer:
    def _post(self, base, path, doc):
        req = urllib.request.Request(
            base + path, data=json.dumps(doc).encode(),
            headers={"Content-Type": "application/json"})
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read().decode())

    def test_parse(self, server):
        status, doc = self._post(server, "/parse",
                                 {"problem": "I I O\nI O O\nO O O\n\nI O\n"})
        assert status == 200
        assert doc["problem"]["alphabet"] == ["I", "O"]

    def test_fixedpoint_payload_matches_cli(self, server, files):
        from lclre.catalog import toy_problem, toy_default_diagram
        status, doc = self._post(server, "/fixedpoint", {
            "problem": toy_problem().to_text(),
            "diagram": toy_default_diagram().to_text()})
        assert status == 200
        r = cli("fixedpoint", files["toy"], files["default"], "--json")
        assert doc["payload_canonical"] == r.stdout.strip()

    def test_validate_diagram_violation(self, server):
        status, doc = self._post(server, "/validate-diagram",
                                 {"diagram": "a -> c\nb -> c\n"})
        assert status == 200
        assert doc == {"ok": False, "kind": "no-unique-inf",
                       "pair": ["a", "b"]}

    def test_error_status(self, server):
        status = None
        try:
            self._post(server, "/parse", {"problem": "A ]\n\nA A\n"})
        except urllib.error.HTTPError as e:
            status = e.code
        assert status == 400

    def test_cache_hit_is_identical(self, server):
        body = {"problem": "A A\n\nA A\n"}
        first = self._post(server, "/check-trivial", body)
        second = self._post(server, "/check-trivial", body)
        assert first == second
