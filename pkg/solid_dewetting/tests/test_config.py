"""Tests for configuration loading, validation and sweep expansion."""
import math
import os
import tempfile
import unittest

from pydantic import ValidationError

from solid_dewetting.config import (
    MANIFEST_KIND,
    expand_sweep,
    list_presets,
    load_config,
    load_preset,
    parse_config,
    serialize_config,
)
from solid_dewetting.exceptions import ConfigError
from solid_dewetting.models import DomainSpec, ProfileSpec, RunConfig, SimOptions, SweepSpec, WettingParams


MINIMAL = """---
name: "tiny"
wetting:
  sigma: {{ sigma | default(0.5) }}
  epsilon: 0.1
profile:
  kind: "stepped"
  x1: -1
  x2: 1
options:
  tau: 0.1
  t_end: 1
"""

PRESETS = [
    "agglomerate-map",
    "cap-convergence",
    "cross",
    "cuboid",
    "long-island",
    "longer-island",
    "semi-infinite",
    "shedding-time",
    "small-island",
    "small-island-cap",
    "square",
    "square-ring",
    "wetting-layer",
]


class TestParseConfig(unittest.TestCase):
    """Rendering, parsing and validation."""

    def test_defaults(self):
        config = parse_config(MINIMAL)
        self.assertEqual("tiny", config.name)
        self.assertEqual("2d", config.dimension)
        self.assertEqual(0.1, config.wetting.h_bar)
        self.assertEqual("paper", config.options.weak_form)
        self.assertEqual("direct", config.options.solver)
        self.assertFalse(config.options.lumped_mass)
        self.assertEqual(0.1, config.sample_interval())
        self.assertEqual(DomainSpec(a=-21.0, b=21.0), config.resolved_domain())

    def test_template_variables(self):
        self.assertEqual(0.25, parse_config(MINIMAL, {"sigma": 0.25}).wetting.sigma)

    def test_problems_carry_line_numbers(self):
        text = MINIMAL.replace("t_end: 1", "t_end: -1")
        with self.assertRaises(ConfigError) as raised:
            parse_config(text, {"sigma": 1.5}, source="bad.yaml")
        lines = sorted(line for line, _ in raised.exception.problems)
        self.assertEqual([4, 12], lines)
        self.assertIn("bad.yaml:4", str(raised.exception))

    def test_unknown_keys_are_rejected(self):
        with self.assertRaises(ConfigError) as raised:
            parse_config(MINIMAL.replace("  tau: 0.1", "  tua: 0.1"))
        self.assertEqual(11, raised.exception.problems[0][0])
        self.assertIn("options.tua", raised.exception.problems[0][1])

    def test_yaml_syntax_error(self):
        with self.assertRaises(ConfigError) as raised:
            parse_config("wetting: [unclosed\n")
        self.assertIn("YAML syntax error", str(raised.exception))

    def test_template_error(self):
        with self.assertRaises(ConfigError):
            parse_config("name: {{ broken\n")

    def test_not_a_mapping(self):
        with self.assertRaises(ConfigError):
            parse_config("- just\n- a list\n")

    def test_manifest_is_re_executable(self):
        config = parse_config(MINIMAL)
        manifest = "kind: %s\nstatus: completed\nconfig:\n%s" % (
            MANIFEST_KIND,
            "".join(f"  {line}\n" for line in serialize_config(config).splitlines()),
        )
        self.assertEqual(config, parse_config(manifest))

    def test_serialize_round_trip(self):
        config = load_preset("square-ring", {"c": 11})
        self.assertEqual(config, parse_config(serialize_config(config)))


class TestPresets(unittest.TestCase):
    """The bundled presets."""

    def test_all_presets_listed(self):
        self.assertEqual(PRESETS, list_presets())

    def test_all_presets_load(self):
        for name in list_presets():
            with self.subTest(preset=name):
                config = load_preset(name)
                self.assertTrue(config.name)
                self.assertGreaterEqual(len(expand_sweep(config)), 1)
                self.assertTrue(config.options.adaptive_tau)

    def test_parametric_presets(self):
        self.assertEqual("square-40", load_preset("square", {"size": 40}).name)
        self.assertEqual((1, 16), load_preset("cuboid", {"length": 16}).profile.widths)
        ring = load_preset("square-ring", {"c": 11}).profile
        self.assertEqual((11.0, 11.0), ring.widths)
        self.assertEqual((9.0, 9.0), ring.inner_widths)
        self.assertEqual(9.0, load_preset("cross", {"c": 9}).profile.limb_length)

    def test_three_dimensional_presets(self):
        for name in ("square", "cuboid", "square-ring", "cross"):
            config = load_preset(name)
            self.assertEqual("3d", config.dimension)
            self.assertAlmostEqual(math.cos(math.radians(80)), config.wetting.sigma)
            self.assertEqual(0.25, config.profile.edge_width)
            domain = config.resolved_domain()
            xmin, xmax, ymin, ymax = config.profile.bounding_box()
            self.assertEqual((xmin - 10.0, xmax + 10.0), (domain.a, domain.b))
            self.assertEqual((ymin - 10.0, ymax + 10.0), (domain.c, domain.d))

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError) as raised:
            load_preset("no-such-preset")
        self.assertIn("small-island", str(raised.exception))

    def test_load_config_by_file_or_preset(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "tiny.yaml")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(MINIMAL)
            self.assertEqual("tiny", load_config(path).name)
        self.assertEqual("small-island", load_config("small-island").name)
        self.assertEqual("small-island", load_config("preset:small-island").name)


class TestSweeps(unittest.TestCase):
    """Cartesian sweep expansion."""

    def test_no_sweep(self):
        config = parse_config(MINIMAL)
        self.assertEqual([("tiny", config)], expand_sweep(config))

    def test_epsilon_sweep_moves_h_bar(self):
        points = expand_sweep(load_preset("cap-convergence"))
        self.assertEqual(["epsilon=0.1", "epsilon=0.05", "epsilon=0.025"], [label for label, _ in points])
        for _, point in points:
            self.assertEqual(point.wetting.epsilon, point.wetting.h_bar)
            self.assertIsNone(point.sweep)

    def test_explicit_h_bar_is_kept(self):
        config = parse_config(MINIMAL + "sweep:\n  epsilon: [0.05, 0.2]\n")
        self.assertEqual([0.05, 0.2], [point.wetting.h_bar for _, point in expand_sweep(config)])
        text = MINIMAL.replace("  epsilon: 0.1", "  epsilon: 0.1\n  h_bar: 0.3")
        config = parse_config(text + "sweep:\n  epsilon: [0.05, 0.2]\n")
        self.assertEqual([0.3, 0.3], [point.wetting.h_bar for _, point in expand_sweep(config)])

    def test_angle_and_length_product(self):
        points = expand_sweep(load_preset("agglomerate-map", {"lengths": [50, 100], "angles": [math.pi / 3]}))
        self.assertEqual(["theta_i=1.0472_length=50", "theta_i=1.0472_length=100"], [label for label, _ in points])
        first = points[0][1]
        self.assertAlmostEqual(0.5, first.wetting.sigma)
        self.assertEqual((-25.0, 25.0), (first.profile.x1, first.profile.x2))
        self.assertEqual("theta_i=1.0472_length=50", first.name)

    def test_length_sweep_needs_stepped_profile(self):
        with self.assertRaises(ConfigError):
            parse_config(MINIMAL.replace('kind: "stepped"', 'kind: "flat"\n  level: 0.5') + "sweep:\n  length: [1]\n")


class TestModels(unittest.TestCase):
    """Validation rules of the configuration models."""

    def test_wetting_params(self):
        self.assertEqual(0.2, WettingParams(sigma=0.5, epsilon=0.2).h_bar)
        self.assertEqual(1.0, WettingParams(sigma=1.0, epsilon=0.2).sigma)
        for bad in ({"sigma": 0.0, "epsilon": 0.1}, {"sigma": 1.5, "epsilon": 0.1}, {"sigma": 0.5, "epsilon": 0.0}):
            with self.assertRaises(ValidationError):
                WettingParams(**bad)

    def test_large_h_bar_warns(self):
        with self.assertLogs("solid_dewetting.models", level="WARNING"):
            WettingParams(sigma=0.5, epsilon=0.01, h_bar=0.5)

    def test_sim_options(self):
        self.assertEqual([0.0, 1.0, 2.0], SimOptions(snapshot_times=[2.0, 0.0, 1.0, 2.0]).snapshot_times)
        self.assertEqual(-0.1, SimOptions().floor_for(WettingParams(sigma=0.5, epsilon=0.1)))
        for bad in ({"tau": 0.0}, {"t_end": -1.0}, {"solver_rtol": 1e-3}, {"weak_form": "other"}):
            with self.assertRaises(ValidationError):
                SimOptions(**bad)

    def test_profile_geometry(self):
        for bad in (
            {"kind": "stepped", "x1": 1.0, "x2": 0.0},
            {"kind": "semi-infinite"},
            {"kind": "flat"},
            {"kind": "square", "widths": (1.0, 2.0)},
            {"kind": "square-ring", "widths": (4.0, 4.0), "inner_widths": (4.0, 2.0)},
            {"kind": "cross", "widths": (1.0, 1.0)},
            {"kind": "cuboid", "widths": (1.0, 1.0), "floor_thickness": 0.0},
        ):
            with self.subTest(profile=bad), self.assertRaises(ValidationError):
                ProfileSpec(**bad)

    def test_dimension_checks(self):
        wetting = {"sigma": 0.5, "epsilon": 0.1}
        with self.assertRaises(ValidationError):
            RunConfig(wetting=wetting, profile={"kind": "square", "widths": (2.0, 2.0)})
        with self.assertRaises(ValidationError):
            RunConfig(dimension="3d", wetting=wetting, profile={"kind": "semi-infinite", "x1": 0.0})
        strip = RunConfig(dimension="3d", wetting=wetting, profile={"kind": "stepped", "x1": -1.0, "x2": 1.0})
        self.assertEqual(DomainSpec(a=-21.0, b=21.0, c=0.0, d=1.0), strip.resolved_domain())

    def test_sweep_axes(self):
        with self.assertRaises(ValidationError):
            SweepSpec()
        with self.assertRaises(ValidationError):
            SweepSpec(sigma=[0.5], theta_i=[1.0])
