"""Tokenizer behaviour: classifications, spans, losslessness, error recovery."""

import random

from fairspec.dsl.lexer import KEYWORDS, tokenize


def rejoin(tokens) -> str:
    return "".join(tok.leading + tok.lexeme for tok in tokens)


class TestTokenKinds:
    def test_keywords_and_idents(self):
        tokens, diags = tokenize("bias sex top banana group_size")
        assert not diags
        kinds = [(t.kind, t.lexeme) for t in tokens[:-1]]
        assert kinds == [
            ("keyword", "bias"),
            ("ident", "sex"),
            ("keyword", "top"),
            ("ident", "banana"),
            ("keyword", "group_size"),
        ]

    def test_label_words_are_plain_idents(self):
        tokens, _ = tokenize("prediction ground_truth")
        assert [t.kind for t in tokens[:-1]] == ["ident", "ident"]

    def test_numbers(self):
        tokens, diags = tokenize("0 12 3.25")
        assert not diags
        assert [t.value for t in tokens[:-1]] == [0.0, 12.0, 3.25]

    def test_string_escapes(self):
        tokens, diags = tokenize(r'"a \"quoted\" value" "back\\slash"')
        assert not diags
        assert tokens[0].value == 'a "quoted" value'
        assert tokens[1].value == "back\\slash"

    def test_two_char_punct_beats_one_char(self):
        tokens, _ = tokenize("-> == <= >= != = < >")
        assert [t.lexeme for t in tokens[:-1]] == [
            "->", "==", "<=", ">=", "!=", "=", "<", ">",
        ]

    def test_comment_to_end_of_line(self):
        tokens, diags = tokenize("bias # a comment\nkind")
        assert not diags
        assert [t.lexeme for t in tokens[:-1]] == ["bias", "kind"]


class TestSpans:
    def test_line_and_column_are_one_based(self):
        tokens, _ = tokenize("bias\n  kind")
        assert (tokens[0].span.line, tokens[0].span.column) == (1, 1)
        assert (tokens[1].span.line, tokens[1].span.column) == (2, 3)

    def test_length_matches_lexeme(self):
        tokens, _ = tokenize('map "abc"')
        assert tokens[0].span.length == 3
        assert tokens[1].span.length == 5


class TestErrors:
    def test_unterminated_string(self):
        tokens, diags = tokenize('domain: "oops\nkind')
        assert any(d.code == "lex-error" for d in diags)
        assert diags[0].span.line == 1 and diags[0].span.column == 9

    def test_illegal_character_is_reported_and_skipped(self):
        tokens, diags = tokenize("bias @ kind")
        assert [t.lexeme for t in tokens[:-1]] == ["bias", "kind"]
        assert diags[0].code == "lex-error"
        assert diags[0].span.column == 6


class TestLossless:
    def test_crafted_inputs_rejoin_exactly(self):
        samples = [
            "",
            "   \t\n",
            "bias \"x\" { # comment\n}\n",
            'a == "un\\"terminated',
            "@@@ ??? ### not a comment? yes it is\n12.5.6",
            "map s -> column t { a = 0 }",
        ]
        for text in samples:
            tokens, _ = tokenize(text)
            assert rejoin(tokens) == text

    def test_random_inputs_rejoin_exactly(self):
        rng = random.Random(0xF41)
        alphabet = 'abz_019 \t\n"\\#{}[]()<>=!+-*/|:,.@$%~?'
        for _ in range(500):
            text = "".join(
                rng.choice(alphabet) for _ in range(rng.randrange(0, 120))
            )
            tokens, _ = tokenize(text)
            assert rejoin(tokens) == text


def test_keyword_set_is_frozen():
    assert "bias" in KEYWORDS
    assert "prediction" not in KEYWORDS  # soft keyword, usable as a column
