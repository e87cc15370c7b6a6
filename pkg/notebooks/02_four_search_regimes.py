# # The four search regimes
#
# Counterfactual validity comes in four flavours, crossing two axes:
# whether a specific outcome is demanded (targeted vs untargeted) and
# whether outcomes are judged at the item or the category level.

import tempfile
from pathlib import Path

from seqcf import (
    GaConfig,
    SettingSpec,
    explain,
    k_core_filter,
    leave_one_out_split,
    load_categories,
    synthesize_corpus,
    top_k,
    train_markov,
)
from seqcf.dataset import write_categories

log, raw_categories = synthesize_corpus(num_users=150, num_items=80, seed=5)
split = leave_one_out_split(k_core_filter(log, 5))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "categories.tsv"
    write_categories(raw_categories, path)
    categories = load_categories(path, split.catalog)
split = split.with_categories(categories)

model = train_markov(split.train, split.catalog.num_items)
config = GaConfig(generations=20, population_size=256, max_len=split.max_len)

user = split.users[3]
source = split.train[user]
source_top = top_k(model.score(source), 1)[0]
print(f"user {user}: suggestion {source_top}, categories {sorted(categories.of(source_top))}")

# ## Untargeted, item level: any change of suggestion counts


def show(name, record):
    if record.counterfactual is None:
        print(f"{name}: no counterfactual found")
        return
    new_top = top_k(model.score(record.counterfactual), 1)[0]
    print(
        f"{name}: edits={record.levenshtein} new suggestion {new_top} "
        f"(categories {sorted(categories.of(new_top))})"
    )


show("un_un  ", explain(source, SettingSpec.from_name("un_un"), model, 1, config, seed=1))

# ## Untargeted, category level: the suggestion must leave the source
# suggestion's categories entirely

show(
    "un_cat ",
    explain(
        source, SettingSpec.from_name("un_cat"), model, 1, config, seed=1, categories=categories
    ),
)

# ## Targeted, item level: force one chosen item into the top slot

target_item = next(i for i in range(80) if i not in source.items and i != source_top)
show(
    "targ_un",
    explain(
        source,
        SettingSpec.from_name("targ_un", target_item=target_item),
        model,
        1,
        config,
        seed=1,
    ),
)

# ## Targeted, category level: force any item of a chosen category

target_category = (max(categories.of(source_top)) + 1) % categories.num_categories
show(
    "targ_cat",
    explain(
        source,
        SettingSpec.from_name("targ_cat", target_category=target_category),
        model,
        1,
        config,
        seed=1,
        categories=categories,
    ),
)
