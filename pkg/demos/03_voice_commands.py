"""Walkthrough: voice-command resolution.

No training here: a transcript is matched against the 19-command list by
summing two similarities per command, cosine between mean word vectors and
Jaro-Winkler between the phrase strings. The best command wins only if its
total beats 1.0, otherwise the input is ignored.
"""

import numpy as np

from natcmd import jaro_winkler, normalize_phrase, resolve_command
from natcmd.voice import DEFAULT_COMMAND_PHRASES, EmbeddingTable, default_command_list

commands = default_command_list()
print("command vocabulary:")
for cmd in commands:
    print(f"  {cmd.action_id:16s} <- {cmd.phrase!r}")

# A real deployment loads a large pre-trained table (load_embeddings on a
# word2vec-style text file). A small random table over the command words is
# enough to demonstrate the scoring; "go" and "walk" are placed on top of
# "move" to emulate learned synonymy.
rng = np.random.default_rng(0)
words = sorted({t for p in DEFAULT_COMMAND_PHRASES for t in p.split()})
entries = {w: rng.normal(0, 1, 32) for w in words}
entries["go"] = entries["move"].copy()
entries["walk"] = entries["move"].copy()
table = EmbeddingTable(dimension=32, entries=entries)

for transcript in (
    "move forward",     # exact phrase: cosine 1 + jaro-winkler 1 = 2.0
    "walk forward",     # synonym carried by the embedding side
    "show the schedule",  # partial string overlap
    "zzz qqq",          # gibberish: every total <= 1, so it is ignored
):
    result = resolve_command(transcript, commands, table)
    best = max(result.per_candidate, key=lambda c: c.total)
    verdict = result.matched[0] if result.matched else "(ignored)"
    print(f"\n{transcript!r} -> {verdict}")
    print(f"  best candidate {best.phrase!r}: cosine {best.cosine:.3f} "
          f"+ jaro_winkler {best.jaro_winkler:.3f} = {best.total:.3f}")

# the string-similarity half on its own
print("\njaro-winkler, character level:")
for a, b in (("martha", "marhta"), ("zoom in", "zoom out"), ("look up", "move back")):
    print(f"  {a!r} vs {b!r}: {jaro_winkler(a, b):.4f}")

print(f"\nnormalization: {normalize_phrase('  Move FORWARD!! ').canonical!r}")
