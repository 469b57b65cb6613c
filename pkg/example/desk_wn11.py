import os
import sys
import numpy as np
import adaptivekg as akg

### The WN11 directory (train.txt, dev.txt, test.txt with labels)
wn11_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.environ.get('ADAPTIVEKG_DATA', '.'), 'WN11')
ts = akg.read_dataset(wn11_dir)
print(akg.dataset_statistics(ts))

### Small configuration: single worker, fixed seed
accuracy = {}
for variant in ['transE', 'transA']:
	cfg = akg.preset_config('wn11')
	cfg.update(variant=variant, k=20, epochs=100, seed=7, workers=1)
	model, report = akg.train(ts, cfg)
	thr = akg.tune_thresholds(model, ts.valid, ts.valid_labels)
	accuracy[variant] = akg.classify(model, thr, ts.test, ts.test_labels)
	print('%s: test accuracy %.2f%% (best epoch %s)' % (variant, accuracy[variant], report.best_epoch))

### The adaptive metric should classify better
gap = accuracy['transA'] - accuracy['transE']
print('TransA - TransE = %.2f points' % gap)
if gap < 2: print('Gap below 2 points')

### Weight difference of the learned TransA metrics
table = [row for row in akg.weight_table(model, ts) if not np.isnan(row['weight_difference'])]
for row in sorted(table, key=lambda row: row['weight_difference'], reverse=True)[:5]:
	print('%-30s %.3f' % (row['relation'], row['weight_difference']))
