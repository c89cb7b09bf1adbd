"""Regenerate the bundled toy corpus under fixtures/toy/.

Hand-authored content: six questions, four passages each (two from the
relevant pool, two random), with nugget spans located by substring
search so the offsets stay correct if the wording changes.
"""

from pathlib import Path

from answerability import interchange
from answerability.types import Dataset, Nugget, Passage, Question

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "toy"

# (question text, [(passage text, relevant, [nugget substrings])])
CONTENT = [
    ("Who founded the ancient city of Rome?", [
        ("According to legend, Rome was founded by Romulus in 753 BC. He and "
         "his twin brother Remus were raised by a she-wolf. The city grew on "
         "the Palatine Hill.",
         True, ["Rome was founded by Romulus in 753 BC"]),
        ("Ancient historians credit Romulus as the founder. Later scholars "
         "debate every detail of the legend.",
         True, ["Romulus as the founder"]),
        ("The Colosseum hosted gladiator games. It could seat fifty thousand "
         "spectators.",
         False, []),
        ("Modern Rome is the capital of Italy. Tourists visit the Trevi "
         "Fountain every day.",
         False, []),
    ]),
    ("How do honey bees communicate the location of food?", [
        ("Honey bees perform a waggle dance to signal the direction and "
         "distance of flowers. The dance happens on the vertical comb. Other "
         "workers follow the dancer closely.",
         True, ["waggle dance to signal the direction and distance of flowers"]),
        ("Bees are social insects that live in colonies. A hive may contain "
         "tens of thousands of workers.",
         True, []),
        ("Butterflies migrate thousands of miles each year. The monarch is "
         "the best known example.",
         False, []),
        ("Honey has been harvested by humans for millennia. Cave paintings "
         "in Spain show early beekeepers.",
         False, []),
    ]),
    ("What causes the northern lights?", [
        ("The aurora appears when charged particles from the sun strike "
         "gases in the upper atmosphere. Oxygen glows green and red. "
         "Nitrogen adds blue and purple hues.",
         True, ["charged particles from the sun strike gases",
                "Oxygen glows green and red"]),
        ("Solar wind electrons collide with the magnetosphere and excite "
         "atmospheric atoms. The strongest displays follow solar storms.",
         True, ["Solar wind electrons collide with the magnetosphere"]),
        ("Iceland sits on the mid-Atlantic ridge. Volcanic eruptions shape "
         "its landscape.",
         False, []),
        ("Polar bears roam the Arctic sea ice. They hunt seals at breathing "
         "holes.",
         False, []),
    ]),
    # Deliberately unanswerable: no nuggets anywhere for this question.
    ("When was the first transatlantic telegraph cable completed?", [
        ("Telegraph lines spread quickly across Europe in the nineteenth "
         "century. Messages that once took weeks arrived in minutes.",
         True, []),
        ("Undersea cables required gutta-percha insulation. Laying them "
         "demanded specially fitted ships.",
         True, []),
        ("Samuel Morse demonstrated his code in 1844. The message travelled "
         "from Washington to Baltimore.",
         False, []),
        ("Radio eventually displaced the telegraph. Marconi sent signals "
         "across the Atlantic in 1901.",
         False, []),
    ]),
    ("Why do leaves change color in autumn?", [
        ("Chlorophyll breaks down in autumn, unmasking yellow and orange "
         "pigments. Dr. Hale showed the carotenoids were present all "
         "summer. Cooler nights speed the change.",
         True, ["Chlorophyll breaks down in autumn"]),
        ("Shorter days trigger trees to seal off their leaves. Trapped "
         "sugars can form red anthocyanins.",
         True, ["Trapped sugars can form red anthocyanins"]),
        ("Evergreen conifers keep their needles through winter. Their waxy "
         "coating limits water loss.",
         False, []),
        ("Maple syrup is tapped in early spring. Cold nights and warm days "
         "keep the sap flowing.",
         False, []),
    ]),
    ("What is the tallest mountain on Earth measured from base to peak?", [
        ("Measured from its underwater base, Mauna Kea rises over ten "
         "thousand meters, taller than Everest. Most of the mountain lies "
         "beneath the Pacific.",
         True, ["Mauna Kea rises over ten thousand meters"]),
        ("Mount Everest stands 8,849 meters above sea level. Climbers face "
         "extreme cold and thin air.",
         True, []),
        ("The Mariana Trench is the deepest point of the ocean. Its bottom "
         "lies nearly eleven kilometers down.",
         False, []),
        ("K2 is notorious among mountaineers. Winter ascents were not "
         "achieved until 2021.",
         False, []),
    ]),
]


def build_corpus() -> Dataset:
    dataset = Dataset()
    for qi, (question_text, passages) in enumerate(CONTENT, start=1):
        qid = f"q{qi}"
        dataset.questions.append(Question(id=qid, text=question_text))
        for pi, (text, relevant, nugget_substrings) in enumerate(passages, start=1):
            pid = f"{qid}-p{pi}"
            dataset.passages.append(Passage(
                id=pid, question_id=qid, text=text, relevant=relevant,
            ))
            for sub in nugget_substrings:
                start = text.find(sub)
                assert start >= 0, f"nugget text not found in {pid}: {sub!r}"
                dataset.nuggets.append(Nugget(
                    question_id=qid, passage_id=pid, span=(start, start + len(sub)),
                ))
    return dataset


PIPELINE_TOML = """\
[corpus]
input = "corpus.jsonl"

[output]
dir = "out"

[dataset]
n = 3

[split]
seed = 7
train_fraction = 0.5
validation_fraction_of_train = 0.34

[scorer]
backend = "oracle"

[aggregation]
all_configs = true
"""


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    interchange.save_corpus(build_corpus(), FIXTURE_DIR / "corpus.jsonl")
    (FIXTURE_DIR / "pipeline.toml").write_text(PIPELINE_TOML, encoding="utf-8")
    print(f"wrote {FIXTURE_DIR / 'corpus.jsonl'} and pipeline.toml")


if __name__ == "__main__":
    main()
