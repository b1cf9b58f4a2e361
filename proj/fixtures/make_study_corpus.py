"""Regenerates study_corpus.json, the 11-presentation synthetic corpus.

Each viewpoint sentence carries exactly one NABC cue word plus four topic
words. A later sentence that reuses an earlier topic is picked up as an
opinion flow by the mock provider; every other pair shares at most the cue
word. The echo plan fixes how many flows enter at each presentation.
"""
import json
import random
from pathlib import Path

PRESENTERS = ["Starfire", "Pixel", "Nimbus", "Quartz", "Falcon", "Juniper",
              "Orbit", "Cascade", "Ember", "Harbor", "Lumen"]
DOMAINS = ["SSH", "DS", "WL", "CR", "SSH", "PSS", "WT", "DS", "CR", "PSS", "WT"]
COUNTS = [8, 9, 8, 7, 9, 10, 6, 8, 9, 7, 8]
# incoming flows per presentation (index 0 has none by construction)
ECHOES = [0, 3, 4, 4, 5, 7, 0, 6, 7, 6, 0]

TOPICS = [
    ("household", "survey", "response", "rates"), ("village", "council", "trust", "networks"),
    ("gender", "labour", "division", "patterns"), ("migrant", "worker", "remittance", "flows"),
    ("public", "health", "record", "systems"), ("rainfall", "forecast", "model", "ensembles"),
    ("satellite", "imagery", "crop", "classifiers"), ("anomaly", "detection", "pipeline", "alerts"),
    ("wetland", "bird", "census", "counts"), ("forest", "canopy", "loss", "maps"),
    ("pollinator", "habitat", "corridor", "planning"), ("invasive", "species", "spread", "tracking"),
    ("coral", "reef", "bleaching", "events"), ("drought", "resistant", "maize", "varieties"),
    ("terrace", "farming", "erosion", "control"), ("greenhouse", "humidity", "sensor", "grids"),
    ("legume", "rotation", "nitrogen", "balance"), ("orchard", "frost", "warning", "sirens"),
    ("grain", "storage", "silo", "monitoring"), ("fertilizer", "subsidy", "voucher", "schemes"),
    ("river", "basin", "sediment", "loads"), ("aquifer", "recharge", "well", "logs"),
    ("piped", "chlorine", "dosing", "pumps"), ("rooftop", "rain", "harvest", "tanks"),
    ("desalination", "brine", "disposal", "costs"), ("leak", "acoustic", "pipe", "surveys"),
    ("market", "price", "board", "signals"), ("cooperative", "seed", "bank", "ledgers"),
    ("mobile", "payment", "kiosk", "outlets"), ("cold", "chain", "vaccine", "fridges"),
    ("solar", "microgrid", "battery", "banks"), ("school", "meal", "nutrition", "audits"),
    ("livestock", "grazing", "rotation", "calendars"), ("fish", "pond", "oxygen", "levels"),
    ("soil", "moisture", "probe", "arrays"), ("road", "access", "travel", "times"),
    ("open", "data", "portal", "licences"), ("citizen", "science", "volunteer", "apps"),
    ("flood", "plain", "zoning", "rules"), ("wastewater", "reuse", "treatment", "plants"),
    ("tariff", "design", "billing", "reform"), ("village", "water", "committee", "budgets"),
    ("pasture", "biomass", "drone", "flights"), ("mangrove", "carbon", "stock", "plots"),
    ("heat", "stress", "dairy", "herds"), ("grassland", "fire", "scar", "mapping"),
    ("label", "noise", "crowd", "annotations"), ("urban", "garden", "compost", "hubs"),
]

CUES = {
    "N": ["We need {0} {1} for {2} {3}.", "There is a need for {0} {1} and {2} {3}.",
          "We lack {0} {1} for {2} {3}."],
    "A": ["Our approach is {0} {1} with {2} {3}.", "We deploy {0} {1} into {2} {3}.",
          "The method is {0} {1} for {2} {3}."],
    "B": ["This will improve {0} {1} and {2} {3}.", "It would enable {0} {1} for {2} {3}.",
          "The benefit is {0} {1} with {2} {3}."],
    "C": ["It is in competition with {0} {1} and {2} {3}.", "Existing {0} {1} and {2} {3} are weak.",
          "Compared with {0} {1} and {2} {3} it is slow."],
}

FILLER = [
    "Thank you all for coming today.", "Let me give some context first.",
    "Here is a short story from the field.", "The slides show a few photos from the site visit.",
    "That is the main point of this part.", "Questions are welcome at the end.",
    "I will keep this brief.", "Our group met twice this month.",
]

WATER = "There is an essential need for clean and safe water in communities served by the project."


def main():
    rng = random.Random(7)
    topics = list(TOPICS)
    rng.shuffle(topics)
    labels = "NABC"

    # slots[p] = list of (label, topic); sources available for later echoes
    slots = [[] for _ in COUNTS]
    free_sources = []  # (presentation, topic) not yet echoed
    for p, n in enumerate(COUNTS):
        echoes = ECHOES[p]
        targets = []
        while len(targets) < echoes:
            src = free_sources.pop()
            take = min(2, echoes - len(targets))
            targets += [src[1]] * take
        for topic in targets:
            slots[p].append((labels[rng.randrange(4)], topic))
        own = n - len(targets)
        if p == 6:
            slots[p].append(("N", None))
            own -= 1
        for _ in range(own):
            topic = topics.pop()
            slots[p].append((labels[rng.randrange(4)], topic))
            free_sources.append((p, topic))
        rng.shuffle(slots[p])

    presentations = []
    for p, items in enumerate(slots):
        sentences = []
        used = {}
        for label, topic in items:
            sentences.append(rng.choice(FILLER))
            if topic is None:
                sentences.append(WATER)
                continue
            # a topic echoed twice in one talk needs two distinct sentences
            choices = [t for t in CUES[label] if (topic, t) not in used]
            template = rng.choice(choices)
            used[(topic, template)] = True
            sentences.append(template.format(*topic))
        sentences.append("Thank you.")
        presentations.append({
            "id": f"P{p + 1:02d}",
            "order_index": p + 1,
            "presenter": PRESENTERS[p],
            "domain_code": DOMAINS[p],
            "transcript": " ".join(sentences),
        })

    domains = [
        {"code": "PSS", "name": "Plant and soil sciences",
         "keywords": ["crop", "soil", "plant", "fertilizer", "seed", "farming", "nitrogen"]},
        {"code": "WT", "name": "Water technology",
         "keywords": ["water", "pipe", "treatment", "chlorine", "aquifer", "rain", "pumps"]},
        {"code": "WL", "name": "Wildlife and ecology",
         "keywords": ["species", "habitat", "forest", "bird", "reef", "wetland", "pollinator"]},
        {"code": "CR", "name": "Climate resilience",
         "keywords": ["drought", "flood", "rainfall", "heat", "frost", "carbon", "fire"]},
        {"code": "DS", "name": "Data science",
         "keywords": ["data", "model", "classifiers", "pipeline", "detection", "forecast", "annotations"]},
        {"code": "SSH", "name": "Social sciences and humanities",
         "keywords": ["household", "village", "gender", "labour", "trust", "survey", "community"]},
    ]
    doc = {"domains": domains, "presentations": presentations,
           "metadata": {"description": "synthetic 11-presentation study corpus", "generator_seed": 7}}
    out = Path(__file__).with_name("study_corpus.json")
    out.write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
