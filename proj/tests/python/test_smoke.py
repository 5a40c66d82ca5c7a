import itertools
import math
import os
import pathlib
import random

import pytest

import medie

DATA = pathlib.Path(os.environ.get("MEDIE_TEST_DATA", pathlib.Path(__file__).parent.parent / "data"))


@pytest.fixture(scope="module")
def scheme():
    return medie.builtin_scheme()


def test_version():
    assert medie.__version__.count(".") == 2


def test_scheme_lookups(scheme):
    assert len(scheme.entity_types) == 18
    assert len(scheme.relation_types) == 10
    assert len(scheme.attribute_types) == 10
    assert scheme.relation_allows("Information–Suggest–Status", "Test Process", "Disease or Syndrome")
    assert not scheme.relation_allows("Information–Suggest–Status", "Department", "Disease or Syndrome")
    assert not scheme.attribute_applies("Negation", "Test Result")
    with pytest.raises(Exception):
        scheme.entity_id("Virus")


def test_standoff_round_trip(scheme):
    corpus = medie.read_corpus(str(DATA / "respiratory"), scheme)
    assert len(corpus) == 1
    entry = corpus.entries[0]
    assert len(entry.gold.entities) == 11
    assert medie.validate(entry.gold, len(entry.text), scheme) == []
    text = medie.serialize_standoff(entry.gold, entry.text, scheme)
    assert medie.parse_standoff(entry.text, text, scheme) == entry.gold


def test_validator_reports(scheme):
    result = scheme.entity_id("Test Result")
    e = medie.Entity(result, 0, 4)
    ann = medie.AnnotationSet([e], [], [medie.Attribute(scheme.attribute_id("Negation"), e)])
    kinds = [k for k, _ in medie.validate(ann, 10, scheme)]
    assert kinds == ["AttributeApplicability"]


def test_bio_round_trip(scheme):
    d = scheme.entity_id("Drug")
    ents = [medie.Entity(d, 1, 3), medie.Entity(d, 4, 5)]
    tags = medie.bio_encode(ents, 6)
    assert medie.tag_name(tags[1], scheme) == "B-Drug"
    assert medie.bio_decode(tags) == ents


def brute_force(em, tr):
    T, K = len(em), len(em[0]) if em else 0
    best, scores = None, []
    for y in itertools.product(range(K), repeat=T):
        s = tr[K][y[0]] + tr[y[-1]][K + 1] + sum(em[t][y[t]] for t in range(T))
        s += sum(tr[y[t - 1]][y[t]] for t in range(1, T))
        scores.append(s)
        if best is None or s > best[1]:
            best = (list(y), s)
    m = max(scores)
    return best, m + math.log(sum(math.exp(s - m) for s in scores))


def test_crf_against_enumeration():
    rng = random.Random(5)
    for _ in range(30):
        T, K = rng.randint(1, 4), rng.randint(1, 4)
        em = [[rng.uniform(-2, 2) for _ in range(K)] for _ in range(T)]
        tr = [[rng.uniform(-2, 2) for _ in range(K + 2)] for _ in range(K + 2)]
        (path, score), log_z = brute_force(em, tr)
        got_path, got_score = medie.crf_viterbi(em, tr)
        assert got_path == path
        assert got_score == pytest.approx(score, abs=1e-10)
        assert medie.crf_log_partition(em, tr) == pytest.approx(log_z, abs=1e-10)
        assert medie.crf_sequence_score(em, tr, path) == pytest.approx(score, abs=1e-10)


def test_scoring_fixture(scheme):
    gold = medie.read_corpus(str(DATA / "respiratory"), scheme)
    report = medie.iaa(gold, gold, scheme)
    assert report["entity"]["f1"] == 1.0
    d = scheme.entity_id("Drug")
    g = medie.AnnotationSet([medie.Entity(d, 0, 2), medie.Entity(d, 3, 5), medie.Entity(d, 6, 8), medie.Entity(d, 9, 11)])
    p = medie.AnnotationSet([medie.Entity(d, 0, 2), medie.Entity(d, 3, 5), medie.Entity(d, 6, 8),
                             medie.Entity(d, 9, 12), medie.Entity(d, 13, 14)])
    r = medie.score("entity", g, p, scheme)
    assert (r["gold"], r["pred"], r["correct"]) == (4, 5, 3)
    assert r["precision"] == pytest.approx(0.6)
    assert r["recall"] == pytest.approx(0.75)


def test_generate_train_extract(scheme, tmp_path):
    corpus = medie.split_corpus(medie.generate(12, seed=3), counts=(8, 2, 2), seed=3)
    assert len(corpus.record_ids()) == 12
    train, dev, test = corpus.select("train"), corpus.select("dev"), corpus.select("test")
    config = '{"entity": {"max_epochs": 3, "learning_rate": 0.05}, "span": {"max_epochs": 3}}'
    bundle = medie.train_pipeline(train, dev, scheme, seed=1, config_json=config)
    for entry in test:
        out = bundle.extract(entry.text)
        assert medie.validate(out, len(entry.text), scheme) == []
    again = medie.PipelineBundle.load(bundle.save())
    assert again.save() == bundle.save()
    dropped = medie.preannotate(bundle, test, 1.0, seed=2)
    assert all(len(a.entities) == 0 for a in dropped)
    with pytest.raises(medie.ConfigError):
        medie.train_pipeline(train, dev, scheme, config_json='{"bogus": 1}')
    medie.write_corpus(str(tmp_path / "c"), corpus, scheme)
    assert len(medie.read_corpus(str(tmp_path / "c"), scheme)) == len(corpus)
