import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from piisub.detection import (
    DetectorProtocolError,
    DetectorUnavailable,
    ExternalDetector,
    TaggedToken,
    decode_bioes,
    detect_oracle,
    detect_rules,
    encode_bioes,
    resolve_overlaps,
    validate_spans,
)
from piisub.model import CorpusRecord, Label, PiiSpan


def make_record(text, **gt):
    return CorpusRecord(
        id="r",
        text=text,
        locale="en_US",
        template="t",
        pii_gt={Label.from_name(k.upper()): v for k, v in gt.items()},
    )


class TestOracle:
    def test_finds_every_occurrence(self):
        rec = make_record(
            "Walter called. walter again. WALTER signed.",
            person=["Walter"],
        )
        spans = detect_oracle(rec)
        assert [(s.start, s.end) for s in spans] == [(0, 6), (15, 21), (29, 35)]
        assert all(s.label is Label.PERSON for s in spans)

    def test_surfaces_match_text(self):
        rec = make_record("Send to Hans Müller today.", person=["hans müller"])
        (span,) = detect_oracle(rec)
        assert span.surface == "Hans Müller"

    def test_value_absent_yields_nothing(self):
        rec = make_record("no names here", person=["Walter"])
        assert detect_oracle(rec) == []

    def test_overlapping_values_resolved_longest_first(self):
        rec = make_record(
            "Account 123456789 active",
            account=["123456789", "3456"],
        )
        spans = detect_oracle(rec)
        assert [s.surface for s in spans] == ["123456789"]


class TestResolveOverlaps:
    def test_longest_wins(self):
        a = PiiSpan(0, 10, Label.PERSON, "x" * 10)
        b = PiiSpan(2, 6, Label.ACCOUNT, "x" * 4)
        assert resolve_overlaps([a, b]) == [a]

    def test_leftmost_breaks_length_ties(self):
        a = PiiSpan(0, 4, Label.PERSON, "aaaa")
        b = PiiSpan(2, 6, Label.PERSON, "aabb")
        assert resolve_overlaps([a, b]) == [a]

    def test_duplicates_collapse(self):
        a = PiiSpan(0, 4, Label.PERSON, "aaaa")
        assert resolve_overlaps([a, a]) == [a]

    def test_disjoint_sorted_by_start(self):
        a = PiiSpan(8, 12, Label.DATE, "dddd")
        b = PiiSpan(0, 4, Label.PERSON, "pppp")
        assert resolve_overlaps([a, b]) == [b, a]


class TestValidateSpans:
    def test_overlap_rejected(self):
        text = "abcdefgh"
        spans = [
            PiiSpan(0, 4, Label.PERSON, "abcd"),
            PiiSpan(3, 6, Label.PERSON, "def"),
        ]
        with pytest.raises(ValueError, match="overlap"):
            validate_spans(text, spans)

    def test_out_of_bounds_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            validate_spans("ab", [PiiSpan(0, 5, Label.PERSON, "abcde")])

    def test_surface_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            validate_spans("abcd", [PiiSpan(0, 3, Label.PERSON, "xyz")])


class TestBioes:
    def test_decode_simple(self):
        tokens = [
            TaggedToken("Walter", 0, 6, "B-PERSON"),
            TaggedToken("Abernathy", 7, 16, "E-PERSON"),
            TaggedToken("called", 17, 23, "O"),
        ]
        (span,) = decode_bioes(tokens)
        assert (span.start, span.end, span.label) == (0, 16, Label.PERSON)
        assert span.surface == "Walter Abernathy"

    def test_orphan_inside_starts_span(self):
        tokens = [TaggedToken("x", 0, 1, "I-DATE")]
        (span,) = decode_bioes(tokens)
        assert span.label is Label.DATE

    def test_orphan_end_is_single(self):
        tokens = [
            TaggedToken("a", 0, 1, "O"),
            TaggedToken("b", 2, 3, "E-PHONE"),
        ]
        (span,) = decode_bioes(tokens)
        assert (span.start, span.end) == (2, 3)

    def test_label_switch_mid_span_closes(self):
        tokens = [
            TaggedToken("a", 0, 1, "B-PERSON"),
            TaggedToken("b", 2, 3, "I-DATE"),
        ]
        spans = decode_bioes(tokens)
        assert [(s.label, s.start) for s in spans] == [
            (Label.PERSON, 0),
            (Label.DATE, 2),
        ]

    def test_unordered_tokens_rejected(self):
        tokens = [
            TaggedToken("b", 5, 6, "O"),
            TaggedToken("a", 0, 1, "O"),
        ]
        with pytest.raises(ValueError):
            decode_bioes(tokens)

    def test_malformed_tag_rejected(self):
        with pytest.raises(ValueError):
            decode_bioes([TaggedToken("a", 0, 1, "Q-PERSON")])

    @settings(max_examples=60)
    @given(st.data())
    def test_encode_decode_round_trip(self, data):
        words = data.draw(
            st.lists(st.text("abcdef", min_size=1, max_size=5), min_size=1, max_size=12)
        )
        text = " ".join(words)
        # token offsets
        offsets, pos = [], 0
        for w in words:
            offsets.append((pos, pos + len(w)))
            pos += len(w) + 1
        # pick non-overlapping token-aligned spans
        n = len(words)
        spans = []
        i = 0
        while i < n:
            if data.draw(st.booleans()):
                j = data.draw(st.integers(min_value=i, max_value=min(n - 1, i + 2)))
                label = data.draw(st.sampled_from(list(Label)))
                start, end = offsets[i][0], offsets[j][1]
                spans.append(PiiSpan(start, end, label, text[start:end]))
                i = j + 1
            else:
                i += 1
        decoded = decode_bioes(encode_bioes(text, spans))
        assert decoded == spans


class TestRules:
    def test_covers_regular_labels(self):
        text = (
            "Mail edith.goodwin11@northmail.com or visit "
            "https://portal.northmail.com/claims/42, ref 123456789, "
            "phone +1-555-233-0199, due 1975-04-12."
        )
        spans = detect_rules(text)
        by_label = {s.label: s.surface for s in spans}
        assert by_label[Label.EMAIL] == "edith.goodwin11@northmail.com"
        assert by_label[Label.URL] == "https://portal.northmail.com/claims/42"
        assert by_label[Label.ACCOUNT] == "123456789"
        assert by_label[Label.PHONE] == "+1-555-233-0199"
        assert by_label[Label.DATE] == "1975-04-12"

    def test_url_trailing_punctuation_trimmed(self):
        (span,) = detect_rules("see https://a.example.com/x.")
        assert span.surface == "https://a.example.com/x"

    def test_phone_digit_bounds(self):
        assert detect_rules("call 12-34") == []  # too few digits

    def test_output_is_valid(self):
        text = "04/12/1975 and 1975-04-12 overlap nothing"
        validate_spans(text, detect_rules(text))


@pytest.fixture
def span_script(tmp_path):
    """External detector: reports the byte range of the word 'Walter'."""
    script = tmp_path / "detector.py"
    script.write_text(
        "import json, sys\n"
        "text = sys.stdin.read()\n"
        "i = text.find('Walter')\n"
        "if i >= 0:\n"
        "    print(json.dumps({'start': i, 'end': i + 6, 'label': 'PERSON'}))\n"
    )
    return f"{sys.executable} {script}"


class TestExternalDetector:
    def test_requires_exactly_one_transport(self):
        with pytest.raises(ValueError):
            ExternalDetector()
        with pytest.raises(ValueError):
            ExternalDetector(command="x", url="http://y")

    def test_command_round_trip(self, span_script):
        adapter = ExternalDetector(command=span_script)
        (span,) = adapter.detect("hello Walter bye")
        assert (span.start, span.end, span.label) == (6, 12, Label.PERSON)
        assert span.surface == "Walter"

    def test_empty_response_is_no_spans(self, span_script):
        adapter = ExternalDetector(command=span_script)
        assert adapter.detect("nobody here") == []

    def test_nonzero_exit_is_unavailable(self):
        adapter = ExternalDetector(command=f"{sys.executable} -c 'raise SystemExit(3)'")
        with pytest.raises(DetectorUnavailable):
            adapter.detect("text")

    def test_missing_binary_is_unavailable(self):
        adapter = ExternalDetector(command="/no/such/binary")
        with pytest.raises(DetectorUnavailable):
            adapter.detect("text")

    @pytest.mark.parametrize(
        "payload,message",
        [
            ("not json", "not valid JSON"),
            ("[1, 2]", "expected an object"),
            ('{"start": 0, "end": 99, "label": "PERSON"}', "out of bounds"),
            ('{"start": "0", "end": 4, "label": "PERSON"}', "integers"),
            ('{"start": 0, "end": 4, "label": "NOPE"}', "unknown label"),
            ('{"end": 4, "label": "PERSON"}', "line 1"),
        ],
    )
    def test_protocol_errors(self, tmp_path, payload, message):
        script = tmp_path / "bad.py"
        script.write_text(f"import sys\nsys.stdin.read()\nprint({payload!r})\n")
        adapter = ExternalDetector(command=f"{sys.executable} {script}")
        with pytest.raises(DetectorProtocolError, match=message):
            adapter.detect("some text")
