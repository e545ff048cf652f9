import json

import pytest

from acskod.specfiles import SpecError, acs_from_dict, acs_to_dict, builtin_names, load_acs, load_manifold, \
    manifold_from_dict, manifold_to_dict, parse_acs, parse_manifold, parse_samples, read_source


def _nil_data():
    return json.loads(read_source("nilmanifold_N")[0])


def test_builtins_are_registered():
    assert builtin_names() == ["kodaira_thurston", "nakamura", "nilmanifold_N", "torus4"]
    assert "kodaira_thurston" in builtin_names("families")


def test_empty_file():
    with pytest.raises(SpecError) as ei:
        parse_manifold("", "empty.json")
    assert "empty file" in str(ei.value)


def test_json_syntax_error_has_position():
    with pytest.raises(SpecError) as ei:
        parse_manifold('{"name": "x",\n  "dimension": 4,,}', "bad.json")
    issue = ei.value.issues[0]
    assert issue.line == 2 and issue.column > 0


def test_unknown_key_is_rejected():
    data = _nil_data()
    data["colour"] = "blue"
    with pytest.raises(SpecError) as ei:
        parse_manifold(json.dumps(data))
    assert "unknown key 'colour'" in str(ei.value)


def test_missing_term_breaks_duality():
    # e3 = dz - x dy with the -x dy term dropped
    data = _nil_data()
    data["coframe"][2] = ["0", "0", "1", "0"]
    with pytest.raises(SpecError) as ei:
        parse_manifold(json.dumps(data, indent=2))
    assert any("dual" in i.message for i in ei.value.issues)


def test_bad_lattice_shift_is_rejected():
    data = _nil_data()
    data["lattice_shifts"][0]["z"] = "z"
    with pytest.raises(SpecError) as ei:
        parse_manifold(json.dumps(data))
    assert any("lattice_shifts" in i.path for i in ei.value.issues)


def test_all_errors_are_reported():
    data = _nil_data()
    data["frame_vectors"][0][0] = "1 +"
    data["coframe"][0][0] = "(("
    data["extra"] = 1
    with pytest.raises(SpecError) as ei:
        parse_manifold(json.dumps(data, indent=2))
    assert len(ei.value.issues) >= 3


def test_expression_error_column_points_into_the_string():
    text = '{"J": [["0", "-1", "0", "0"], ["1", "0", "0", "0"], ["0", "0", "0", "-1"], ["0", "0", "1", "0 +"]]}'
    with pytest.raises(SpecError) as ei:
        parse_acs(text, load_manifold("torus4"), "j.json")
    issue = ei.value.issues[0]
    assert issue.path == "J[3][3]"
    assert text[issue.column - 1:].startswith('"0 +"') or issue.column > text.index('"0 +"')


def test_J_squared_error_names_an_entry():
    text = '{"J": [["0", "-1", "0", "0"], ["1", "0", "0", "0"], ["0", "0", "0", "-1"], ["0", "0", "1", "1"]]}'
    with pytest.raises(SpecError) as ei:
        parse_acs(text, load_manifold("torus4"))
    assert "J^2 != -I" in str(ei.value)


def test_samples_must_be_real():
    assert len(parse_samples('{"samples": ["0", "pi/2", "-1/2"]}')) == 3
    with pytest.raises(SpecError):
        parse_samples('{"samples": ["i"]}')
    with pytest.raises(SpecError):
        parse_samples('{"samples": []}')


@pytest.mark.parametrize("name", ["nilmanifold_N", "kodaira_thurston", "torus4", "nakamura"])
def test_serializers_round_trip(name):
    M = load_manifold(name)
    M2 = manifold_from_dict(json.loads(json.dumps(manifold_to_dict(M))))
    assert [str(f) for f in M2.de()] == [str(f) for f in M.de()]
    acs = load_acs("builtin", M) if name != "kodaira_thurston" else None
    if acs is not None:
        acs2 = acs_from_dict(acs_to_dict(acs), M2)
        assert [[str(x) for x in r] for r in acs2.J] == [[str(x) for x in r] for r in acs.J]


def test_manifold_without_builtin_structure():
    with pytest.raises(SpecError) as ei:
        load_acs("builtin", load_manifold("kodaira_thurston"))
    assert "family" in str(ei.value)


def test_missing_file_lists_builtins():
    with pytest.raises(SpecError) as ei:
        load_manifold("no/such/file.json")
    assert "nilmanifold_N" in str(ei.value)
