#!/usr/bin/env python3
"""Generate the bundled memory-forensics sample CSV.

Deterministic synthetic stand-in for a CIC-MalMem-2022 style feature dump:
57 volatility-derived numeric features, a Category column holding
"<Category>-<Family>-<hash>" tokens (plain "Benign" for clean rows), and a
redundant binary Class column. 2,000 rows, 125 per class, seed 42.

The class geometry is tuned so that ensemble averaging pays off (random forest
above a single tree) and so that the many weak/noisy dimensions blunt nearest
neighbor distances (tree above KNN). Memory-injection counters (malfind.*)
carry the strongest between-class signal.
"""

import hashlib
import sys

import numpy as np

FEATURES = [
    "pslist.nproc", "pslist.nppid", "pslist.avg_threads", "pslist.nprocs64bit",
    "pslist.avg_handlers",
    "dlllist.ndlls", "dlllist.avg_dlls_per_proc",
    "handles.nhandles", "handles.avg_handles_per_proc", "handles.nport",
    "handles.nfile", "handles.nevent", "handles.ndesktop", "handles.nkey",
    "handles.nthread", "handles.ndirectory", "handles.nsemaphore",
    "handles.ntimer", "handles.nsection", "handles.nmutant",
    "ldrmodules.not_in_load", "ldrmodules.not_in_init", "ldrmodules.not_in_mem",
    "ldrmodules.not_in_load_avg", "ldrmodules.not_in_init_avg",
    "ldrmodules.not_in_mem_avg",
    "malfind.ninjections", "malfind.commitCharge", "malfind.protection",
    "malfind.uniqueInjections",
    "psxview.not_in_pslist", "psxview.not_in_eprocess_pool",
    "psxview.not_in_ethread_pool", "psxview.not_in_pspcid_list",
    "psxview.not_in_csrss_handles", "psxview.not_in_session",
    "psxview.not_in_deskthrd",
    "psxview.not_in_pslist_false_avg", "psxview.not_in_eprocess_pool_false_avg",
    "psxview.not_in_ethread_pool_false_avg", "psxview.not_in_pspcid_list_false_avg",
    "psxview.not_in_csrss_handles_false_avg", "psxview.not_in_session_false_avg",
    "psxview.not_in_deskthrd_false_avg",
    "modules.nmodules",
    "svcscan.nservices", "svcscan.kernel_drivers", "svcscan.fs_drivers",
    "svcscan.process_services", "svcscan.shared_process_services",
    "svcscan.interactive_process_services", "svcscan.nactive",
    "callbacks.ncallbacks", "callbacks.nanonymous", "callbacks.ngeneric",
    "psscan.nprocs", "psscan.avg_threads",
]

CLASSES = [
    ("Benign", ""),
    ("Trojan", "Zeus"), ("Trojan", "Emotet"), ("Trojan", "Refroso"),
    ("Trojan", "scar"), ("Trojan", "Reconyc"),
    ("Spyware", "180solutions"), ("Spyware", "Coolwebsearch"),
    ("Spyware", "Gator"), ("Spyware", "Transponder"), ("Spyware", "TIBS"),
    ("Ransomware", "Conti"), ("Ransomware", "MAZE"), ("Ransomware", "Pysa"),
    ("Ransomware", "Ako"), ("Ransomware", "Shade"),
]

ROWS_PER_CLASS = 125
SEED = 42

# indices of the informative block; everything else is class-independent noise
MALFIND = [FEATURES.index(n) for n in
           ("malfind.ninjections", "malfind.commitCharge", "malfind.protection",
            "malfind.uniqueInjections")]
LDR = [FEATURES.index(n) for n in
       ("ldrmodules.not_in_load", "ldrmodules.not_in_init", "ldrmodules.not_in_mem")]
PSX = [FEATURES.index("psxview.not_in_pslist"),
       FEATURES.index("psxview.not_in_eprocess_pool")]
SVC = [FEATURES.index("svcscan.nservices"), FEATURES.index("svcscan.nactive")]


def main(out_path):
    rng = np.random.default_rng(SEED)
    n_feats = len(FEATURES)

    # shared baseline: plausible count-like magnitudes per feature
    base = rng.uniform(5.0, 400.0, size=n_feats)
    noise_scale = base * rng.uniform(0.25, 0.9, size=n_feats)

    rows = []
    labels = []
    for ci, (category, family) in enumerate(CLASSES):
        mean = base.copy()
        crng = np.random.default_rng(SEED * 1000 + ci)

        if category != "Benign":
            # malfind block: strong, family-specific elevation
            lift = crng.uniform(2.0, 6.0, size=len(MALFIND))
            mean[MALFIND] = base[MALFIND] * (1.0 + lift)
            # weaker secondary signals
            mean[LDR] = base[LDR] * (1.0 + crng.uniform(0.3, 1.2, size=len(LDR)))
            mean[PSX] = base[PSX] * (1.0 + crng.uniform(0.2, 0.8, size=len(PSX)))
            mean[SVC] = base[SVC] * (1.0 - crng.uniform(0.1, 0.4, size=len(SVC)))
        # mild family drift on a random handful of other features so classes are
        # separable in principle but heavily overlapping in any single dimension
        drift_idx = crng.choice(n_feats, size=10, replace=False)
        mean[drift_idx] = mean[drift_idx] * (1.0 + crng.uniform(-0.35, 0.35, size=10))

        x = mean + rng.normal(0.0, 1.0, size=(ROWS_PER_CLASS, n_feats)) * noise_scale
        x = np.clip(x, 0.0, None)
        rows.append(x)
        labels.extend([(category, family)] * ROWS_PER_CLASS)

    X = np.vstack(rows)
    order = rng.permutation(len(X))
    X = X[order]
    labels = [labels[i] for i in order]

    with open(out_path, "w") as out:
        out.write(",".join(FEATURES) + ",Category,Class\n")
        for x, (category, family) in zip(X, labels):
            vals = ",".join(f"{v:.4f}" for v in x)
            if category == "Benign":
                token, cls = "Benign", "Benign"
            else:
                h = hashlib.sha1(f"{family}-{vals[:40]}".encode()).hexdigest()[:10]
                token, cls = f"{category}-{family}-{h}", "Malware"
            out.write(f"{vals},{token},{cls}\n")
    print(f"wrote {len(X)} rows x {n_feats} features to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/malmem_sample_2000.csv")
