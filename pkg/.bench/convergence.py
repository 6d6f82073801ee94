import time, numpy as np, json
from pathlib import Path
from dataclasses import replace
from handtwin.config import desk_preset
from handtwin import pipeline
from handtwin.diffusion import make_schedule, train_step, LossWeights
from handtwin.model import build_model
from handtwin.numerics import AdamW
from handtwin.evaluation import evaluate, CVHPredictor

root = Path("/root/pkg/.bench/data")
cfg = desk_preset()
t0 = time.monotonic()
if not (root / "manifest.json").exists():
    pipeline.synthesize_dataset(cfg, root)
print("synth:", round(time.monotonic()-t0,1), "s", flush=True)

t0 = time.monotonic()
train_seqs = pipeline.load_split(root, "train")
test_seqs = pipeline.load_split(root, "test")
prepared = pipeline.prepare_dataset(train_seqs, cfg.model)
print("prep:", round(time.monotonic()-t0,1), "s", flush=True)

cvh = evaluate(CVHPredictor(), test_seqs)
print("CVH ade3d:", round(cvh.mean_ade3d, 4), "fde3d:", round(cvh.mean_fde3d,4), flush=True)
bar = 0.8 * cvh.mean_ade3d

model = build_model(cfg.model, cfg.train.seed)
opt = AdamW(model, lr=cfg.train.lr, weight_decay=cfg.train.weight_decay)
schedule = make_schedule(cfg.schedule.t_total, cfg.schedule.kind)
rng = np.random.default_rng([cfg.train.seed, 0x7EA1])
weights = LossWeights(*cfg.train.loss_weights)

results = []
t_start = time.monotonic()
for epoch in range(1, 81):
    perm = rng.permutation(len(prepared))
    tot = n = 0
    for lo in range(0, len(prepared), cfg.train.batch_size):
        vals = train_step(model, prepared.batch(perm[lo:lo+16]), schedule, opt, weights, rng)
        tot += vals["total"]; n += 1
    if epoch % 5 == 0:
        pred = pipeline.TwinPredictor(model, cfg)
        rep = evaluate(pred, test_seqs, rng_seed=0)
        dt = time.monotonic() - t_start
        row = dict(epoch=epoch, loss=tot/n, ade3d=rep.mean_ade3d, fde3d=rep.mean_fde3d,
                   ade2d=rep.mean_ade2d, minutes=dt/60, beats=rep.mean_ade3d < bar)
        results.append(row)
        print(json.dumps(row), flush=True)
        Path("/root/pkg/.bench/convergence.json").write_text(json.dumps(
            dict(cvh_ade3d=cvh.mean_ade3d, cvh_fde3d=cvh.mean_fde3d, bar=bar, rows=results), indent=1))
print("done", flush=True)
