"""End-to-end checks of the nmlc executable: exit codes, report JSON and
conformance with the schemas under docs/schemas."""

import json
import math
import os
import subprocess
import sys
import tempfile
import unittest

import jsonschema

NMLC = None
SCHEMAS = None


def load_schema(name):
    with open(os.path.join(SCHEMAS, name), encoding="utf-8") as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    return schema


def run(*args, cwd=None):
    return subprocess.run([NMLC, *args], capture_output=True, text=True, cwd=cwd, timeout=300)


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.report_schema = load_schema("report.schema.json")
        cls.config_schema = load_schema("config.schema.json")
        cls.catalog_schema = load_schema("catalog.schema.json")
        cls.tmp = tempfile.TemporaryDirectory()

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def report(self, *args, expect=0):
        out = self.path("report.json")
        proc = run(*args, "--output", out)
        self.assertEqual(proc.returncode, expect, proc.stderr)
        with open(out, encoding="utf-8") as f:
            text = f.read()
        self.assertNotIn("NaN", text)
        report = json.loads(text)
        jsonschema.validate(report, self.report_schema)
        jsonschema.validate(report["config"], self.config_schema)
        return report

    def test_list_models_matches_catalog_schema(self):
        report = self.report("list-models")
        jsonschema.validate(report["result"], self.catalog_schema)
        ids = [m["id"] for m in report["result"]["models"]]
        self.assertIn("exponential", ids)
        self.assertIn("bernoulli", ids)

    def test_discrete_comp(self):
        result = self.report("comp", "--model", "bernoulli", "--N", "2")["result"]
        for method in ("brute", "pushforward", "sufficient_stat"):
            self.assertEqual(result["methods"][method], 2.5)

    def test_continuous_comp(self):
        result = self.report("comp", "--model", "exponential", "--N", "2", "--luckiness",
                             "box:1,2.718281828459045")["result"]
        self.assertAlmostEqual(result["methods"]["gfunction"]["value"], 4 * math.exp(-2), delta=1e-12)
        self.assertAlmostEqual(result["methods"]["brute"]["value"], 4 * math.exp(-2), delta=1e-9)

    def test_divergent_comp_reports_inf(self):
        result = self.report("comp", "--model", "exponential", "--N", "1")["result"]
        self.assertTrue(result["divergent"])
        self.assertEqual(result["comp"], "inf")

    def test_nml_and_select(self):
        data = self.path("x.csv")
        with open(data, "w", encoding="utf-8") as f:
            f.write("# sample\n0.1,3.0,0.4\n")
        nml = self.report("nml", "--model", "exponential", "--N", "3", "--luckiness", "box:0.5,5",
                          "--method", "gfunction", "--data", data)["result"]
        self.assertEqual(len(nml["rows"]), 1)

        config = {
            "command": "select",
            "models": [
                {"id": "exponential", "params": {"N": 3}, "luckiness": "box:0.5,5"},
                {"id": "gauss-mean", "params": {"N": 3}, "luckiness": "box:-5,5"},
            ],
            "method": "gfunction",
            "data": data,
        }
        jsonschema.validate(config, self.config_schema)
        cfg = self.path("select.json")
        with open(cfg, "w", encoding="utf-8") as f:
            json.dump(config, f)
        result = self.report("select", "--config", cfg)["result"]
        self.assertEqual(result["rows"][0]["selected_model"], "exponential")

    def test_verify(self):
        result = self.report("verify", "--case", "annulus")["result"]
        self.assertTrue(result["passed"])

    def test_exit_codes(self):
        unknown = run("comp", "--model", "no-such-model")
        self.assertEqual(unknown.returncode, 2)
        self.assertIn("no-such-model", unknown.stderr)
        self.assertEqual(run("comp", "--bogus-flag").returncode, 2)
        self.assertEqual(run().returncode, 2)
        bad_config = self.path("bad.json")
        with open(bad_config, "w", encoding="utf-8") as f:
            json.dump({"command": "comp", "colour": "red"}, f)
        proc = run("comp", "--config", bad_config)
        self.assertEqual(proc.returncode, 2)
        self.assertIn("config.colour", proc.stderr)

        data = self.path("one.csv")
        with open(data, "w", encoding="utf-8") as f:
            f.write("1.0\n")
        infinite = run("nml", "--model", "exponential", "--N", "1", "--data", data)
        self.assertEqual(infinite.returncode, 1)

    def test_reports_are_deterministic(self):
        args = ["comp", "--model", "exponential", "--N", "4", "--luckiness", "box:1,3", "--method", "brute",
                "--quad-method", "qmc", "--budget", "65536", "--box", "0,40;0,40;0,40;0,40", "--output", "-"]
        first = run(*args)
        second = run(*args)
        self.assertEqual(first.returncode, 0, first.stderr)
        self.assertEqual(first.stdout, second.stdout)


if __name__ == "__main__":
    NMLC = sys.argv[1]
    SCHEMAS = sys.argv[2]
    unittest.main(argv=[sys.argv[0], "-v"])
