# %% [markdown]
# How the activity classifier responds to window length.
# Train on one synthetic corpus and score a corpus drawn with another seed.

# %%
import numpy as np

from beamsense.mobility import synthesize_corpus
from beamsense.sensing import ActivityClass, classify_features, labelled_features, train

train_corpus = synthesize_corpus(duration=120.0, seed=1)
test_corpus = synthesize_corpus(duration=60.0, seed=2)

# %%
for ms in (100, 250, 500, 1000):
    X, y = labelled_features(train_corpus.items(), ms / 1000)
    Xt, yt = labelled_features(test_corpus.items(), ms / 1000)
    pred = np.array(classify_features(train(X, y, k=3), Xt))
    yt = np.array(yt)
    recalls = {c: np.mean(pred[yt == c] == c) for c in ActivityClass}
    print(f"{ms:5d} ms  acc {np.mean(pred == yt):.3f}  "
          + "  ".join(f"{c.value} {r:.2f}" for c, r in recalls.items()))

# %%
# The same split with raw, unscaled feature distances.
X, y = labelled_features(train_corpus.items(), 0.5)
Xt, yt = labelled_features(test_corpus.items(), 0.5)
raw = classify_features(train(X, y, k=3, normalize=False), Xt)
print("raw distance accuracy:", np.mean(np.array(raw) == np.array(yt)).round(3))
