#include "svsr/dpo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "svsr/error.hpp"

namespace svsr {

void check_valid(const DpoConfig& cfg) {
    if (cfg.beta <= 0.0) throw Error(ErrorCode::Config, "dpo.beta must be > 0");
    if (cfg.lr <= 0.0) throw Error(ErrorCode::Config, "dpo.lr must be > 0");
    if (cfg.batch_size < 1 || cfg.steps_per_iter < 0 || cfg.iterations < 1 ||
        cfg.regen_frequency < 1 || cfg.candidates_per_prompt < 2 ||
        cfg.prompts_per_iter < 1 || cfg.jobs < 1)
        throw Error(ErrorCode::Config, "dpo counts must be >= 1");
    if (cfg.tau < 0.0 || cfg.tau > 1.0)
        throw Error(ErrorCode::Config, "dpo.tau must be in [0,1]");
    if (cfg.buffer_capacity < 1)
        throw Error(ErrorCode::Config, "dpo.buffer_capacity must be >= 1");
    if (cfg.heldout_fraction < 0.0 || cfg.heldout_fraction >= 1.0)
        throw Error(ErrorCode::Config, "dpo.heldout_fraction must be in [0,1)");
}

DpoLoss dpo_loss(const Policy& policy, const Weights& params, const Weights& ref_params,
                 const Problem& p, const PreferencePair& pair, double beta) {
    const double lp_win = policy.logprob(params, p, pair.y_win);
    const double lp_lose = policy.logprob(params, p, pair.y_lose);
    const double ref_win = policy.logprob(ref_params, p, pair.y_win);
    const double ref_lose = policy.logprob(ref_params, p, pair.y_lose);
    if (!std::isfinite(lp_win) || !std::isfinite(lp_lose) || !std::isfinite(ref_win) ||
        !std::isfinite(ref_lose))
        throw Error(ErrorCode::Internal, "non-finite log-probability in DPO loss");

    DpoLoss out;
    out.z = beta * ((lp_win - ref_win) - (lp_lose - ref_lose));
    // -ln sigmoid(z), computed stably as log1p(exp(-z)).
    out.loss = out.z >= 0.0 ? std::log1p(std::exp(-out.z))
                            : -out.z + std::log1p(std::exp(out.z));
    const double sig = 1.0 / (1.0 + std::exp(-out.z));
    const Weights g_win = policy.grad_logprob(params, p, pair.y_win);
    const Weights g_lose = policy.grad_logprob(params, p, pair.y_lose);
    out.grad.resize(g_win.size());
    const double scale = -(1.0 - sig) * beta;
    for (std::size_t i = 0; i < g_win.size(); ++i)
        out.grad[i] = scale * (g_win[i] - g_lose[i]);
    return out;
}

std::vector<Trajectory> generate_candidates(const Policy& policy, const Weights& params,
                                            const Problem& p, int n, Rng& rng) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 candidates");
    std::vector<Trajectory> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(policy.sample(params, p, rng));
    return out;
}

LabelResult label_pair(const Problem& p, const std::vector<Trajectory>& candidates,
                       double tau) {
    if (candidates.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "need at least 2 candidates to label");
    std::vector<TeacherScore> scores;
    scores.reserve(candidates.size());
    for (const auto& y : candidates) scores.push_back(teacher_score(p, y));

    std::size_t best = 0, worst = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (scores[i].total > scores[best].total) best = i;
        if (scores[i].total < scores[worst].total) worst = i;
    }
    const double margin = scores[best].total - scores[worst].total;
    if (margin < tau) {
        const bool all_same_correctness =
            std::all_of(scores.begin(), scores.end(), [&](const TeacherScore& s) {
                return s.correctness == scores[0].correctness;
            });
        return all_same_correctness ? RejectReason::Degenerate : RejectReason::Ambiguous;
    }
    PreferencePair pair;
    pair.problem_id = p.id;
    pair.y_win = candidates[best];
    pair.y_lose = candidates[worst];
    pair.teacher_margin = margin;
    pair.source = PairSource::Online;
    return pair;
}

std::optional<double> preference_accuracy(const Policy& policy, const Weights& params,
                                          const std::map<std::string, const Problem*>& by_id,
                                          const std::vector<PreferencePair>& pairs) {
    if (pairs.empty()) return {};
    int hits = 0;
    for (const auto& pair : pairs) {
        const auto it = by_id.find(pair.problem_id);
        if (it == by_id.end())
            throw Error(ErrorCode::InvalidArgument,
                        "preference pair for unknown problem " + pair.problem_id);
        const Problem& p = *it->second;
        if (policy.logprob(params, p, pair.y_win) >
            policy.logprob(params, p, pair.y_lose))
            ++hits;
    }
    return static_cast<double>(hits) / pairs.size();
}

namespace {

std::optional<double> buffer_mean_margin(const PreferenceBuffer& buf) {
    if (buf.size() == 0) return {};
    double sum = 0.0;
    for (const auto& p : buf.pairs()) sum += p.teacher_margin;
    return sum / buf.size();
}

// Candidate generation for one iteration. Per-prompt rngs are derived
// up front so results are identical for any jobs count.
std::vector<std::vector<Trajectory>> generate_all(
    const Policy& policy, const Weights& params,
    const std::vector<const Problem*>& prompts, int n, int jobs,
    std::uint64_t iter_seed) {
    std::vector<std::vector<Trajectory>> out(prompts.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = make_rng(iter_seed, i);
            out[i] = generate_candidates(policy, params, *prompts[i], n, rng);
        }
    };
    if (jobs <= 1 || prompts.size() < 2) {
        work(0, prompts.size());
        return out;
    }
    const std::size_t nthreads = std::min<std::size_t>(jobs, prompts.size());
    std::vector<std::thread> threads;
    const std::size_t chunk = (prompts.size() + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(prompts.size(), b + chunk);
        if (b < e) threads.emplace_back(work, b, e);
    }
    for (auto& th : threads) th.join();
    return out;
}

} // namespace

PipelineResult run_pipeline(const DpoConfig& cfg, const Policy& policy,
                            const std::vector<PreferencePair>& seed_pairs,
                            const std::vector<Problem>& prompts,
                            const std::function<TeacherScore(const Problem&,
                                                             const Trajectory&)>& teacher,
                            const Weights& sft_params,
                            const std::vector<std::pair<std::string, Trajectory>>&
                                extra_winners) {
    check_valid(cfg);
    if (seed_pairs.empty())
        throw Error(ErrorCode::MissingInput, "seed preference pairs are empty");

    std::map<std::string, const Problem*> by_id;
    for (const auto& p : prompts) by_id[p.id] = &p;

    // Held-out split of the seed pairs, deterministic under the run seed.
    std::vector<std::size_t> order(seed_pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng = make_rng(cfg.seed, 101);
    std::shuffle(order.begin(), order.end(), split_rng);
    const std::size_t n_heldout = static_cast<std::size_t>(
        cfg.heldout_fraction * static_cast<double>(seed_pairs.size()));
    std::vector<PreferencePair> heldout, train_seed;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_heldout ? heldout : train_seed).push_back(seed_pairs[order[i]]);
    if (train_seed.empty())
        throw Error(ErrorCode::MissingInput, "held-out split left the buffer empty");

    // Seed winners per problem, for inclusion in online candidate pools.
    // Winners whose pair survived intact take precedence; extra winners
    // cover prompts whose rejected side could not be parsed.
    std::map<std::string, const Trajectory*> seed_by_problem;
    for (const auto& p : train_seed) seed_by_problem.emplace(p.problem_id, &p.y_win);
    for (const auto& [pid, y] : extra_winners) seed_by_problem.emplace(pid, &y);

    PreferenceBuffer buffer(cfg.buffer_capacity, cfg.eviction);
    buffer.update(train_seed);

    const Weights ref_params = sft_params; // pi_ref stays fixed at pi_SFT
    Weights params = sft_params;

    PipelineResult result;
    IterationRecord initial;
    initial.iter = 0;
    initial.buffer_size = buffer.size();
    initial.heldout_pref_acc = preference_accuracy(policy, params, by_id, heldout);
    initial.mean_margin = buffer_mean_margin(buffer);
    result.history.push_back(initial);

    Rng loop_rng = make_rng(cfg.seed, 202);
    std::uniform_int_distribution<std::size_t> any_prompt(0, prompts.empty() ? 0
                                                                             : prompts.size() - 1);

    // One online-generation phase: sample a fresh prompt slice, generate
    // candidates with the current params, teacher-label, push to buffer.
    // Returns the number of accepted pairs.
    auto regenerate = [&](const Weights& cur_params, int t,
                          std::uint64_t phase) -> std::size_t {
        if (prompts.empty())
            throw Error(ErrorCode::MissingInput, "semi-online mode needs prompts");
        std::vector<const Problem*> slice;
        slice.reserve(cfg.prompts_per_iter);
        for (int i = 0; i < cfg.prompts_per_iter; ++i)
            slice.push_back(&prompts[any_prompt(loop_rng)]);
        const auto candidate_sets = generate_all(
            policy, cur_params, slice, cfg.candidates_per_prompt, cfg.jobs,
            mix_seed(cfg.seed, 300 + 1000 * phase + static_cast<std::uint64_t>(t)));
        std::vector<PreferencePair> fresh;
        for (std::size_t i = 0; i < slice.size(); ++i) {
            auto pool = candidate_sets[i];
            // Teacher comparison against prior data: the seed winner
            // joins the pool when this prompt has one.
            if (const auto it = seed_by_problem.find(slice[i]->id);
                it != seed_by_problem.end())
                pool.push_back(*it->second);
            std::vector<TeacherScore> scores;
            scores.reserve(pool.size());
            for (const auto& y : pool) scores.push_back(teacher(*slice[i], y));
            std::size_t best = 0, worst = 0;
            for (std::size_t c = 1; c < pool.size(); ++c) {
                if (scores[c].total > scores[best].total) best = c;
                if (scores[c].total < scores[worst].total) worst = c;
            }
            const double margin = scores[best].total - scores[worst].total;
            if (margin < cfg.tau) continue; // ambiguous or degenerate
            PreferencePair pair;
            pair.problem_id = slice[i]->id;
            pair.y_win = pool[best];
            pair.y_lose = pool[worst];
            pair.teacher_margin = margin;
            pair.source = PairSource::Online;
            pair.created_iter = t;
            fresh.push_back(std::move(pair));
        }
        buffer.update(fresh);
        return fresh.size();
    };

    for (int t = 1; t <= cfg.iterations; ++t) {
        IterationRecord rec;
        rec.iter = t;

        if (cfg.mode == DpoMode::SemiOnline)
            rec.online_pairs = regenerate(params, t, 0);

        if (buffer.size() == 0)
            throw Error(ErrorCode::Internal, "preference buffer is empty");

        double loss_sum = 0.0;
        for (int s = 0; s < cfg.steps_per_iter; ++s) {
            // Sub-iteration refresh every M steps when M < S.
            if (cfg.mode == DpoMode::SemiOnline && s > 0 &&
                s % cfg.regen_frequency == 0)
                rec.online_pairs += regenerate(params, t, 1 + s / cfg.regen_frequency);
            std::uniform_int_distribution<std::size_t> any_pair(0, buffer.size() - 1);
            Weights grad(policy.dim(), 0.0);
            double batch_loss = 0.0;
            for (int b = 0; b < cfg.batch_size; ++b) {
                const PreferencePair& pair = buffer.at(any_pair(loop_rng));
                const auto it = by_id.find(pair.problem_id);
                if (it == by_id.end())
                    throw Error(ErrorCode::Internal,
                                "buffered pair for unknown problem " + pair.problem_id);
                const DpoLoss dl =
                    dpo_loss(policy, params, ref_params, *it->second, pair, cfg.beta);
                batch_loss += dl.loss;
                for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += dl.grad[i];
            }
            const double inv = 1.0 / cfg.batch_size;
            for (double& g : grad) g *= inv;
            gd_step(params, grad, cfg.lr);
            loss_sum += batch_loss * inv;
        }
        if (cfg.steps_per_iter > 0) rec.mean_loss = loss_sum / cfg.steps_per_iter;
        rec.buffer_size = buffer.size();
        rec.heldout_pref_acc = preference_accuracy(policy, params, by_id, heldout);
        rec.mean_margin = buffer_mean_margin(buffer);
        result.history.push_back(rec);
    }

    result.final_params = std::move(params);
    result.buffer_snapshot.assign(buffer.pairs().begin(), buffer.pairs().end());
    return result;
}

} // namespace svsr
