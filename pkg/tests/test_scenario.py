import json
from pathlib import Path

import pytest

from crseq.scenario import (
    BAND_PRESETS,
    InvariantError,
    Scenario,
    band_mask,
    build_qset,
    check_mui_free,
    default_roots,
    link_config,
    parse_axis,
    receiver_mask,
    resolve_mask,
    run_scenario,
    sweep_points,
)
from crseq.serialize import LengthMismatchError, SchemaError
from crseq.simulate import eta

DATA = Path(__file__).resolve().parents[1] / "data"


def test_band_presets_free_fraction():
    assert resolve_mask("two_holes", 1024).n_available == 768
    assert resolve_mask("four_holes", 64).n_available == 32
    assert resolve_mask("full", 16).n_available == 16
    m = band_mask(8, BAND_PRESETS["two_holes"])
    assert m.holes.tolist() == [2, 5]


def test_fixed_masks():
    e2 = resolve_mask("example2")
    assert e2.n == 64 and len(e2.holes) == 14
    assert resolve_mask("ieee80211a").holes.tolist() == [0] + list(range(27, 38))
    assert resolve_mask("example1").holes.tolist() == [4, 5, 9, 10, 11, 12]


def test_resolve_mask_forms(tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"S": [1, 0, 1, 1]}))
    assert resolve_mask(str(f)).holes.tolist() == [1]
    assert resolve_mask({"S": [1, 1, 0]}).holes.tolist() == [2]
    with pytest.raises(LengthMismatchError):
        resolve_mask(str(f), 8)
    with pytest.raises(SchemaError):
        resolve_mask("two_holes")
    with pytest.raises(SchemaError):
        resolve_mask("no_such_mask")


def test_repo_mask_files_match_presets():
    for name in ("example1", "example2", "ieee80211a"):
        assert resolve_mask(str(DATA / f"mask_{name}.json")) == resolve_mask(name)


def test_default_roots():
    assert default_roots(64, 4) == [3, 5, 7, 9]
    r = default_roots(16, 16)
    assert len(set(r)) == 16 and all(u % 2 for u in r)


def test_scenario_validation():
    with pytest.raises(SchemaError):
        Scenario.from_dict({"sytem": "cr_cdma"})
    for bad in (
        {"system": "tdcs"},
        {"codes": "gold"},
        {"engine": "gpu"},
        {"users": 2.5},
        {"users": 0},
        {"ebn0_db": "ten"},
        {"eta": 0},
        {"eta": 1.2},
        {"system": "mc_cdma", "eta": 0.9},
        {"ofdm_mapping": "random"},
    ):
        with pytest.raises(SchemaError):
            Scenario.from_dict(bad)
    with pytest.raises(SchemaError):
        Scenario.from_dict([1])


def test_cp_default_and_replace():
    sc = Scenario()
    assert sc.cp == 256
    assert sc.replace(cp_len=300).cp == 300
    with pytest.raises(SchemaError):
        sc.replace(users=-1)


def test_inline_channel():
    sc = Scenario(channel={"taps": [[0, 3], [2, 1]]})
    assert sc.profile.delays == (0, 2) and sc.profile.powers == (0.75, 0.25)
    with pytest.raises(SchemaError):
        Scenario(channel="tux").profile
    with pytest.raises(SchemaError):
        Scenario(channel={"taps": [[0, "x"]]}).profile


def test_build_qset_defaults():
    q = build_qset(Scenario(users=4))
    assert q.params == (4, 1024, 128)
    q16 = build_qset(Scenario(seed="freq_shift", mask="four_holes", users=16))
    assert q16.K == 16 and q16.N == 16 and q16.zccz_width == 48
    with pytest.raises(SchemaError):
        build_qset(Scenario(block_len=1000))
    with pytest.raises(SchemaError):
        build_qset(Scenario(seed="freq_shift", seed_params={"N": 64, "K": 7}))


def test_receiver_mask_reproducible():
    sc = Scenario(eta=0.96)
    st = resolve_mask("two_holes", 64)
    a, b = receiver_mask(sc, st), receiver_mask(sc, st)
    assert a == b and eta(st, a) == pytest.approx(0.96, abs=0.01)
    assert receiver_mask(Scenario(), st) is st


def test_link_config_eta():
    cfg, e = link_config(Scenario(eta=0.96))
    assert cfg.rx_codes is not None and e == pytest.approx(0.96, abs=0.01)
    cfg, e = link_config(Scenario())
    assert cfg.rx_codes is None and e == 1.0
    with pytest.raises(SchemaError):
        link_config(Scenario(system="ncofdm"))
    with pytest.raises(SchemaError):
        link_config(Scenario(users=5))


def test_invariant_check():
    cfg, _ = link_config(Scenario(users=4))
    assert check_mui_free(cfg) <= 1e-9
    cfg, _ = link_config(Scenario(users=4, max_offset=200, channel="flat"))
    with pytest.raises(InvariantError):
        check_mui_free(cfg)
    cfg, _ = link_config(Scenario(users=1))
    assert check_mui_free(cfg) == 0.0


def test_run_scenario_rows():
    row = run_scenario(Scenario(id="x", users=4, n_bits=2000, nf_db=10))
    assert list(row) == ["scenario_id", "ebn0_db", "nf_db", "eta", "ber", "ci95", "bits"]
    assert row["bits"] == 2000 and row["nf_db"] == 10.0
    o = run_scenario(Scenario(system="ncofdm", mask="four_holes", block_len=64, eta=0.87, n_bits=4000, cp_len=16))
    assert o["eta"] == pytest.approx(0.87, abs=0.01) and o["nf_db"] == 0.0
    m = run_scenario(Scenario(system="mc_cdma", users=2, n_bits=2000))
    assert 0 <= m["ber"] <= 1
    with pytest.raises(InvariantError):
        run_scenario(Scenario(users=4, max_offset=200, channel="flat", n_bits=200))
    run_scenario(Scenario(users=4, max_offset=200, channel="flat", n_bits=200), check=False)


@pytest.mark.parametrize(
    "text,field,values",
    [
        ("nf=0:20:5", "nf_db", [0, 5, 10, 15, 20]),
        ("eta=0.87,0.96,1", "eta", [0.87, 0.96, 1.0]),
        ("users=1:16:5", "users", [1, 6, 11, 16]),
        ("ebn0=0:1:0.1", "ebn0_db", [round(0.1 * i, 10) for i in range(11)]),
    ],
)
def test_parse_axis(text, field, values):
    f, v = parse_axis(text)
    assert f == field and v == values


@pytest.mark.parametrize("text", ["nf", "snr=1,2", "nf=0:10", "nf=0:10:0", "users=1.5,2", "nf=", "nf=a,b"])
def test_parse_axis_rejects(text):
    with pytest.raises(SchemaError):
        parse_axis(text)


def test_sweep_points_order_and_ids():
    pts = sweep_points(Scenario(id="s"), [parse_axis("nf=0,10"), parse_axis("users=1,4")])
    assert [(p.nf_db, p.users) for p in pts] == [(0, 1), (0, 4), (10, 1), (10, 4)]
    assert pts[3].id == "s/nf=10/users=4"
    assert sweep_points(Scenario(id="s"), []) == [Scenario(id="s")]


def test_shipped_scenarios_parse():
    files = sorted((DATA / "scenarios").glob("*.json"))
    assert files
    for f in files:
        sc = Scenario.from_dict(json.loads(f.read_text()))
        assert sc.id
