from hypothesis import given
from hypothesis import strategies as st

from piisub.locales import DateFormat, Locale, classify_date_format, classify_locale


class TestClassifyLocale:
    def test_kana_routes_ja(self):
        assert classify_locale("山田さくら") is Locale.JA
        assert classify_locale("カタカナ") is Locale.JA

    def test_kana_beats_han(self):
        # mixed kanji+kana is Japanese even though kanji alone would be zh
        assert classify_locale("東京都渋谷区さくら通り") is Locale.JA

    def test_han_only_routes_zh(self):
        assert classify_locale("李伟") is Locale.ZH
        assert classify_locale("山田") is Locale.ZH  # kanji-only name: documented limit

    def test_german_chars_and_keywords(self):
        assert classify_locale("Hans Müller") is Locale.DE
        assert classify_locale("Hauptstraße 45, Berlin") is Locale.DE
        assert classify_locale("Karl Schmidt") is Locale.DE  # surname keyword

    def test_spanish_chars_and_keywords(self):
        assert classify_locale("José García") is Locale.ES
        assert classify_locale("Calle Reforma 123") is Locale.ES
        assert classify_locale("Carmen Ortiz") is Locale.ES

    def test_german_beats_spanish(self):
        # both cues present: de wins by precedence
        assert classify_locale("Müller en la Calle Mayor") is Locale.DE

    def test_fallback_en(self):
        assert classify_locale("John Carter") is Locale.EN
        assert classify_locale("1234") is Locale.EN
        assert classify_locale("") is Locale.EN

    @given(st.text(max_size=60))
    def test_total(self, text):
        assert classify_locale(text) in Locale


class TestClassifyDateFormat:
    def test_four_shapes(self):
        assert classify_date_format("04/12/1975") is DateFormat.MDY_SLASH
        assert classify_date_format("25/04/1975") is DateFormat.DMY_SLASH
        assert classify_date_format("1975-04-12") is DateFormat.YMD_DASH
        assert classify_date_format("12-Apr-1975") is DateFormat.DMY_DASH_MON

    def test_slash_disambiguation_on_first_field(self):
        # 12 could be a month -> month-first by default; 13 cannot
        assert classify_date_format("12/01/1975") is DateFormat.MDY_SLASH
        assert classify_date_format("13/01/1975") is DateFormat.DMY_SLASH

    def test_whitespace_tolerated(self):
        assert classify_date_format("  1975-04-12 ") is DateFormat.YMD_DASH

    def test_unknown(self):
        assert classify_date_format("March 3, 1975") is DateFormat.UNKNOWN
        assert classify_date_format("1975/04/12") is DateFormat.UNKNOWN
        assert classify_date_format("not a date") is DateFormat.UNKNOWN
        assert classify_date_format("04/12/1975 extra") is DateFormat.UNKNOWN

    @given(st.text(max_size=40))
    def test_total(self, text):
        assert classify_date_format(text) in DateFormat
