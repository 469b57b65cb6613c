import os
import sys
import adaptivekg as akg

### Published configurations; the runs take hours.
data_root = os.environ.get('ADAPTIVEKG_DATA', '.')
benchmarks = sys.argv[1:] if len(sys.argv) > 1 else ['fb15k', 'wn11', 'fb13']

# reference numbers of TransA
link_targets  = {'fb15k': (80.4, 74.), 'wn18': (94.3, None)}
class_targets = {'wn11': 83.2, 'fb13': 87.3}
dirs = {'fb15k': 'FB15k', 'wn18': 'WN18', 'wn11': 'WN11', 'fb13': 'FB13'}
column_order = {'fb15k': 'htr', 'wn18': 'htr', 'wn11': 'hrt', 'fb13': 'hrt'}

for name in benchmarks:
	ts = akg.read_dataset(os.path.join(data_root, dirs[name]), column_order=column_order[name])
	results = {}
	for variant in ['transE', 'transA']:
		cfg = akg.preset_config(name)
		cfg.update(variant=variant, workers=4)
		model, report = akg.train(ts, cfg)
		akg.save_model(model, '%s_%s.txt' % (name, variant))
		if name in link_targets:
			rr = akg.link_prediction(model, ts, workers=4)
			results[variant] = rr.hits_at_10['filtered']
			print('%s %s: filtered Mean Rank %.1f, HITS@10 %.1f%%' % (name, variant, rr.mean_rank['filtered'], results[variant]))
		else:
			thr = akg.tune_thresholds(model, ts.valid, ts.valid_labels)
			results[variant] = akg.classify(model, thr, ts.test, ts.test_labels)
			print('%s %s: accuracy %.2f%%' % (name, variant, results[variant]))

	if name in link_targets:
		target, tol = link_targets[name][0], 5
	else:
		target, tol = class_targets[name], 3
	status = 'within' if abs(results['transA'] - target) <= tol else 'outside'
	print('%s: TransA %.1f vs reference %.1f (%s +-%d)' % (name, results['transA'], target, status, tol))
	print('%s: TransA - TransE = %.1f' % (name, results['transA'] - results['transE']))
