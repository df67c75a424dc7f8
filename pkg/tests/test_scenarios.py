import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semibohm.errors import ConfigError
from semibohm.scenarios import (
    OUTPUTS,
    SCENARIOS,
    ScenarioSpec,
    build_scenario,
    catalog_spec,
    parse_config,
    read_config,
    with_changes,
)
from semibohm.spectral import boundary_decay, is_resolved


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestParseConfig:
    def test_flags_with_catalog_defaults(self):
        spec = parse_config(scenario="free_caustic", epsilon=1e-3)
        assert spec.modes == 2**12 and spec.tsteps == 10**4
        assert spec.t_final == pytest.approx(0.6)
        assert (spec.x0, spec.length) == (-2.0, 5.0)

    def test_empty_config_gives_catalog_default(self, tmp_path):
        path = write(tmp_path, "# nothing but a comment\n\n")
        for name in SCENARIOS:
            assert parse_config(path, scenario=name) == catalog_spec(name)

    def test_file_values_and_flag_precedence(self, tmp_path):
        path = write(tmp_path, "scenario = free_plane\nepsilon = 0.05  # coarse\nseeds=11\n")
        spec = parse_config(path, epsilon=0.02)
        assert spec.name == "free_plane" and spec.epsilon == 0.02 and spec.seeds == 11

    @pytest.mark.parametrize("eps", [-1.0, 0.0, 2.0])
    def test_out_of_range_epsilon(self, eps):
        with pytest.raises(ConfigError):
            parse_config(scenario="free_caustic", epsilon=eps)

    def test_dt_derives_steps(self):
        spec = parse_config(scenario="free_caustic", dt=1e-4)
        assert spec.tsteps == 6000
        spec = parse_config(scenario="free_caustic", tsteps=500)
        assert spec.dt == pytest.approx(0.6 / 500)
        assert spec.stride == 5

    def test_malformed_line_names_its_number(self, tmp_path):
        path = write(tmp_path, "scenario=vortex\nthis line has no equals sign\n")
        with pytest.raises(ConfigError, match=r"run\.cfg:2:"):
            parse_config(path)

    def test_unknown_key(self, tmp_path):
        path = write(tmp_path, "scenario=vortex\n\nfrobnicate=3\n")
        with pytest.raises(ConfigError, match=r":3: unknown key"):
            read_config(path)
        with pytest.raises(ConfigError):
            parse_config(scenario="vortex", frobnicate=3)

    def test_bad_values(self, tmp_path):
        for text in ("modes=100.5", "doubling=maybe", "epsilon=small"):
            with pytest.raises(ConfigError, match=":1: bad value"):
                read_config(write(tmp_path, text + "\n"))

    def test_invalid_choices(self):
        with pytest.raises(ConfigError):
            parse_config(scenario="nonsense")
        with pytest.raises(ConfigError):
            parse_config()
        with pytest.raises(ConfigError):
            parse_config(scenario="vortex", modes=100)
        with pytest.raises(ConfigError):
            parse_config(scenario="vortex", placement="random")
        with pytest.raises(ConfigError):
            parse_config(scenario="vortex", outputs=("pictures",))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "absent.cfg")


@given(
    st.sampled_from(SCENARIOS),
    st.floats(1e-4, 1.0),
    st.integers(3, 14),
    st.integers(1, 10**5),
    st.integers(1, 500),
    st.sampled_from(["uniform", "quantile"]),
    st.lists(st.sampled_from(OUTPUTS), min_size=1, unique=True),
    st.booleans(),
)
def test_text_roundtrip(tmp_path_factory, name, eps, p, steps, seeds, placement, outputs, doubling):
    spec = catalog_spec(name, epsilon=eps, modes=2**p, tsteps=steps, seeds=seeds,
                        placement=placement, outputs=tuple(outputs), doubling=doubling)
    path = tmp_path_factory.mktemp("cfg") / "spec.txt"
    path.write_text(spec.to_text())
    assert parse_config(path) == spec


class TestCatalog:
    @pytest.mark.parametrize("name", SCENARIOS)
    def test_initial_data_resolved_and_decayed(self, name):
        sc = build_scenario(catalog_spec(name))
        f = sc.initial_field()
        assert is_resolved(f)
        assert boundary_decay(f, 1e-10)

    @pytest.mark.parametrize("name", [n for n in SCENARIOS if n != "free_plane"])
    def test_symmetry_point(self, name):
        sc = build_scenario(catalog_spec(name))
        c = sc.symmetry_point
        d = np.linspace(0.01, 0.3, 7)
        assert np.allclose(np.abs(sc.amplitude.value(c + d)), np.abs(sc.amplitude.value(c - d)))
        assert np.allclose(sc.phase.d1(c + d), -sc.phase.d1(c - d))
        assert np.allclose(sc.potential.value(c + d), sc.potential.value(c - d))

    def test_vortex_datum(self):
        sc = build_scenario(catalog_spec("vortex"))
        x = np.array([0.0, 1.0, 2.0])
        assert np.allclose(sc.initial_field().grid.nodes[256], 0.0)
        assert np.allclose(sc.amplitude.value(x), (2 - 2 * x**2) * np.exp(-x**2 / 2))
        assert sc.epsilon == 1.0 and not sc.is_free

    def test_wavepacket_datum(self):
        sc = build_scenario(catalog_spec("wavepacket"))
        f = sc.initial_field()
        z = (f.grid.nodes - 0.5) / np.sqrt(1e-3)
        assert np.allclose(f.values, 1e-3 ** -0.25 * np.exp(-z**2))

    def test_seed_sets(self):
        sc = build_scenario(catalog_spec("free_caustic"))
        s = sc.seed_set()
        assert len(s) == 51 and s.seeds[25] == pytest.approx(0.5)
        q = sc.seed_set(10, "quantile")
        assert len(q) == 10 and np.all(np.diff(q.seeds) > 0)
        lo, hi = sc.seed_window()
        assert lo < s.seeds[0] + 1e-12 and s.seeds[-1] < hi + 1e-12

    def test_with_changes_revalidates(self):
        spec = catalog_spec("free_plane")
        assert with_changes(spec, seeds=5).seeds == 5
        with pytest.raises(ConfigError):
            with_changes(spec, epsilon=-1.0)

    def test_direct_construction_validates(self):
        with pytest.raises(ConfigError):
            ScenarioSpec("vortex", 1.0, -10.0, 20.0, 512, 0.0, 10)
