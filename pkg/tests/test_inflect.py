from presup import inflect


def test_past_tense_rules():
    assert inflect.past_tense("change") == "changed"
    assert inflect.past_tense("abolish") == "abolished"
    assert inflect.past_tense("try") == "tried"
    assert inflect.past_tense("stop") == "stopped"
    assert inflect.past_tense("play") == "played"


def test_past_tense_irregular():
    assert inflect.past_tense("take") == "took"
    assert inflect.past_tense("do") == "did"
    assert inflect.past_tense("go") == "went"
    assert inflect.past_tense("win") == "won"


def test_third_singular():
    assert inflect.third_singular("come") == "comes"
    assert inflect.third_singular("watch") == "watches"
    assert inflect.third_singular("try") == "tries"
    assert inflect.third_singular("do") == "does"
    assert inflect.third_singular("have") == "has"
    assert inflect.third_singular("be") == "is"


def test_participle_to_past():
    assert inflect.participle_to_past("won") == "won"
    assert inflect.participle_to_past("gone") == "went"
    assert inflect.participle_to_past("discovered") == "discovered"


def test_lemma_candidates():
    assert "discover" in inflect.lemma_candidates("discovered")
    assert "find" in inflect.lemma_candidates("found")
    assert "know" in inflect.lemma_candidates("knew")
    assert "realize" in inflect.lemma_candidates("realized")
    assert "prove" in inflect.lemma_candidates("proves")
    assert "regret" in inflect.lemma_candidates("regretted")
    assert "sing" in inflect.lemma_candidates("sings")
