#include "rpkisim/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rpkisim::attack {

using nlohmann::json;

IntervalPredictor::IntervalPredictor(Duration halfwidth, Duration offset, std::size_t history, Duration cluster_gap)
    : halfwidth_(halfwidth), offset_(offset), history_(std::max<std::size_t>(history, 1)), cluster_gap_(cluster_gap)
{
    if (halfwidth_ <= Duration{}) throw std::invalid_argument("prediction window must be positive");
}

std::optional<Window> IntervalPredictor::observe(SimTime arrival, bool flooded)
{
    if (same_refresh(arrival)) return std::nullopt;
    if (!observations_.empty()) {
        auto& gaps = gaps_[last_flooded_ ? 1 : 0];
        gaps.push_back(arrival - observations_.back());
        if (gaps.size() > history_) gaps.pop_front();
    }
    observations_.push_back(arrival);
    if (observations_.size() > history_ + 1) observations_.erase(observations_.begin());
    last_flooded_ = flooded;
    return window_after(arrival, flooded);
}

bool IntervalPredictor::same_refresh(SimTime arrival) const
{
    return !observations_.empty() && arrival - observations_.back() < cluster_gap_;
}

std::optional<Duration> IntervalPredictor::estimated_period(bool after_flooded) const
{
    const auto* source = &gaps_[after_flooded ? 1 : 0];
    Duration shift;
    if (source->empty()) {
        source = &gaps_[after_flooded ? 0 : 1];
        shift = after_flooded ? flood_extension_ : -flood_extension_;
    }
    if (source->empty()) return std::nullopt;
    std::vector<std::int64_t> gaps;
    for (const auto g : *source) gaps.push_back(g.count_us());
    std::sort(gaps.begin(), gaps.end());
    // trim one from each end once there is enough to spare
    auto first = gaps.begin();
    auto last = gaps.end();
    if (gaps.size() >= 4) {
        ++first;
        --last;
    }
    const double mean = std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
    return Duration::micros(std::llround(mean)) + shift;
}

std::optional<Window> IntervalPredictor::window_after(SimTime refresh_start, bool flooded) const
{
    const auto period = estimated_period(flooded);
    if (!period) return std::nullopt;
    const SimTime centre = refresh_start + *period + offset_;
    return Window{centre - halfwidth_, centre + halfwidth_};
}

std::string to_string(TargetKind k)
{
    switch (k) {
    case TargetKind::pp_syn: return "pp_syn";
    case TargetKind::ns_dns: return "ns_dns";
    case TargetKind::public_resolver: return "public_resolver";
    }
    return "?";
}

TargetKind parse_target_kind(const std::string& s)
{
    if (s == "pp_syn") return TargetKind::pp_syn;
    if (s == "ns_dns") return TargetKind::ns_dns;
    if (s == "public_resolver") return TargetKind::public_resolver;
    throw std::invalid_argument("unknown target kind '" + s + "'");
}

std::string to_string(StartCondition c)
{
    switch (c) {
    case StartCondition::immediate: return "immediate";
    case StartCondition::fresh_manifest: return "fresh_manifest";
    case StartCondition::expiring_manifest: return "expiring_manifest";
    }
    return "?";
}

StartCondition parse_start_condition(const std::string& s)
{
    if (s == "immediate") return StartCondition::immediate;
    if (s == "fresh_manifest") return StartCondition::fresh_manifest;
    if (s == "expiring_manifest") return StartCondition::expiring_manifest;
    throw std::invalid_argument("unknown start condition '" + s + "'");
}

std::uint64_t execute_burst(Engine& engine, const Node& attacker, const AttackPlan& plan, const Window& window,
                            Address spoofed_src, Address target, PacketKind kind, const std::string& qname)
{
    if (window.end <= window.start) return 0;
    const auto count = static_cast<std::uint64_t>(std::llround(plan.r_attacker * window.length().to_seconds()));
    if (count == 0) return 0;
    FloodStream f;
    f.src = spoofed_src;
    f.true_origin = attacker.id();
    f.dst = target;
    f.kind = kind;
    f.qname = qname;
    f.start = window.start;
    f.end = window.end;
    f.count = count;
    engine.send_flood(std::move(f));
    return count;
}

pp::Behavior stall_behavior(const rp::RelyingPartyProfile& victim, std::optional<Duration> hold)
{
    if (victim.per_pp_timeout_throttled.is_infinite()) {
        // only the idle timer applies: keep bytes trickling instead
        return pp::Behavior::throttle(100000.0, 100ull * 1024 * 1024);
    }
    if (hold) return pp::Behavior::stall_idle(*hold);
    Duration bound = victim.per_pp_timeout_idle;
    if (victim.per_pp_timeout_throttled > Duration{}) bound = std::min(bound, victim.per_pp_timeout_throttled);
    return pp::Behavior::stall_idle(bound - Duration::millis(500));
}

StallorisDeployment deploy_stalloris(const rpki::RepositoryTree& repo, const rpki::ObjectId& attacker_ca, Address host,
                                     const StallorisPlan& plan, const rp::RelyingPartyProfile& victim, SimTime now)
{
    if (plan.depth == 0) throw std::invalid_argument("stalloris depth must be at least 1");
    if (plan.base_domain.empty()) throw std::invalid_argument("stalloris base_domain is empty");

    StallorisDeployment out;
    out.victim_view = std::make_shared<rpki::RepositoryTree>(repo);
    out.behavior = stall_behavior(victim, plan.per_level_hold);

    // the adversary CA's own publication point is the first stalled level
    std::size_t remaining = plan.depth - 1;
    std::size_t per_chain = remaining;
    if (plan.split_at_depth) {
        const std::size_t ca_depth = repo.depth_of(attacker_ca);
        if (*plan.split_at_depth <= ca_depth) throw std::invalid_argument("split depth must exceed the adversary CA depth");
        per_chain = *plan.split_at_depth - ca_depth;
    }
    while (remaining > 0) {
        const std::size_t len = std::min(per_chain, remaining);
        out.chain_lengths.push_back(len);
        remaining -= len;
    }

    const rpki::Certificate& ca = repo.cert(attacker_ca);
    const Duration validity = Duration::days(545);
    for (std::size_t i = 0; i < out.chain_lengths.size(); ++i) {
        const std::string base = "c" + std::to_string(i) + "." + plan.base_domain;
        auto frag = rpki::build_delegation_chain(out.chain_lengths[i], 1, base, ca.resources, host, now, validity);
        for (const auto& [d, a] : frag.tree.domain_map) out.chain_domains.push_back(d);
        out.victim_view->graft(attacker_ca, frag.tree, frag.roots);
    }
    auto& m = out.victim_view->manifests.at(attacker_ca);
    m.valid_from = now;
    m.valid_until = now + validity;
    return out;
}

std::string AttackReport::bursts_csv() const
{
    std::ostringstream out;
    out << "burst,window_start,window_end,packets,victim_attempts_denied\n";
    for (std::size_t i = 0; i < bursts.size(); ++i) {
        const auto& b = bursts[i];
        out << i << ',' << format_seconds(b.window.start) << ',' << format_seconds(b.window.end) << ',' << b.packets << ','
            << b.victim_attempts_denied << '\n';
    }
    return out.str();
}

DowngradeCampaign::DowngradeCampaign(Engine& engine, Attacker& attacker, rp::RelyingParty& victim, Vrp victim_vrp,
                                     AttackPlan plan, CampaignTarget target, CampaignHooks hooks)
    : engine_(engine),
      attacker_(attacker),
      victim_(victim),
      victim_vrp_(victim_vrp),
      plan_(std::move(plan)),
      target_(std::move(target)),
      hooks_(std::move(hooks)),
      predictor_(plan_.window / 2, plan_.window_offset)
{
    if (plan_.r_attacker < 0) throw std::invalid_argument("attacker rate must be non-negative");
    predictor_.set_flood_extension(plan_.flood_extension);
    victim_.on_refresh([this](const rp::RefreshReport& r) { on_refresh(r); });
    for (const auto& w : plan_.bursts) {
        report_.started = true;
        schedule_burst(w);
    }
}

void DowngradeCampaign::observe(SimTime arrival)
{
    if (finished()) return;
    if (predictor_.same_refresh(arrival)) return;
    // counted as flooded only when the refresh landed near the middle of the last burst
    bool flooded = false;
    if (last_fired_) {
        const SimTime mid = last_fired_->start + last_fired_->length() / 2;
        const Duration miss = arrival + plan_.window_offset - mid;
        flooded = std::llabs(miss.count_us()) < (plan_.window / 4).count_us();
    }
    const auto window = predictor_.observe(arrival, flooded);
    ++report_.refreshes_observed;
    engine_.log().record(arrival, attacker_.name(), "refresh-observed", json{{"observations", report_.refreshes_observed}});
    if (!report_.started) {
        maybe_start(arrival);
        if (!report_.started) return;
    }
    if (window) schedule_burst(*window);
}

void DowngradeCampaign::maybe_start(SimTime arrival)
{
    if (predictor_.observations().size() < plan_.warmup_observations) return;
    if (plan_.r_attacker <= 0) return; // announce-only
    switch (plan_.start) {
    case StartCondition::immediate:
    case StartCondition::fresh_manifest: break;
    case StartCondition::expiring_manifest:
        if (!hooks_.manifest_remaining || hooks_.manifest_remaining() >= hooks_.expiring_threshold) return;
        break;
    }
    report_.started = true;
    report_.attack_start = arrival;
    engine_.log().record(arrival, attacker_.name(), "attack-start",
                         json{{"start_condition", to_string(plan_.start)},
                              {"period_s", predictor_.estimated_period()->to_seconds()}});
}

void DowngradeCampaign::schedule_burst(const Window& w)
{
    Window win = w;
    if (last_scheduled_ && win.start < *last_scheduled_ + plan_.window) return;
    if (win.end <= engine_.now()) return;
    win.start = std::max(win.start, engine_.now());
    last_scheduled_ = win.start;
    engine_.schedule(win.start, attacker_.id(), [this, win]() { fire_burst(win); });
    if (blind_) {
        // no feedback: assume the refresh happened where predicted
        const SimTime assumed = win.start + (win.end - win.start) / 2 - plan_.window_offset;
        engine_.schedule(win.end, attacker_.id(), [this, assumed]() {
            if (finished()) return;
            if (predictor_.observations().back() < assumed - Duration::seconds(60)) {
                if (auto next = predictor_.observe(assumed)) schedule_burst(*next);
            }
        });
    }
}

void DowngradeCampaign::fire_burst(const Window& w)
{
    if (finished()) return;
    if (engine_.now() - report_.attack_start > plan_.max_duration) {
        report_.gave_up = true;
        engine_.log().record(engine_.now(), attacker_.name(), "attack-abandoned", json{{"bursts", report_.bursts.size()}});
        return;
    }
    if (stall_deployed_ && hooks_.victim_stalled && hooks_.victim_stalled()) {
        engine_.log().record(engine_.now(), attacker_.name(), "burst-skipped", json{{"reason", "victim stalled"}});
        return;
    }
    if (plan_.stalloris && !stall_deployed_ && hooks_.deploy_stall) {
        hooks_.deploy_stall();
        stall_deployed_ = true;
    }
    const std::uint64_t denied_before = target_.denied_so_far ? target_.denied_so_far() : 0;
    const std::uint64_t packets =
        execute_burst(engine_, attacker_, plan_, w, target_.spoofed_src, target_.address, target_.kind, target_.qname);
    report_.packets_sent += packets;
    if (packets > 0) last_fired_ = w;
    const std::size_t index = report_.bursts.size();
    report_.bursts.push_back(BurstRecord{w, packets, 0});
    engine_.log().record(engine_.now(), attacker_.name(), "burst",
                         json{{"index", index}, {"target", target_.address.str()}, {"spoofed", target_.spoofed_src.str()},
                              {"packets", packets}, {"window_end", format_seconds(w.end)}});
    if (target_.denied_so_far) {
        engine_.schedule(w.end + Duration::seconds(15), attacker_.id(), [this, index, denied_before]() {
            report_.bursts[index].victim_attempts_denied = target_.denied_so_far() - denied_before;
        });
    }
}

bool DowngradeCampaign::victim_vrp_present() const
{
    const auto& v = victim_.vrps();
    return v && v->entries.count(victim_vrp_) > 0;
}

void DowngradeCampaign::on_refresh(const rp::RefreshReport& r)
{
    if (!report_.started || finished() || r.ended < report_.attack_start) return;
    if (victim_vrp_present()) return;
    report_.downgraded = true;
    report_.t_unknown = r.ended;
    engine_.log().record(r.ended, attacker_.name(), "downgrade",
                         json{{"rp", r.rp}, {"refresh_index", r.index},
                              {"elapsed_s", (r.ended - report_.attack_start).to_seconds()},
                              {"bursts", report_.bursts.size()}});
    if (hooks_.on_downgrade) hooks_.on_downgrade(report_);
}

std::string to_string(Measurement m)
{
    switch (m) {
    case Measurement::match: return "match";
    case Measurement::no_match: return "no-match";
    case Measurement::invalid: return "invalid";
    }
    return "?";
}

std::string to_string(Attribution::Kind k)
{
    switch (k) {
    case Attribution::Kind::match: return "match";
    case Attribution::Kind::no_match: return "no-match";
    case Attribution::Kind::indeterminate: return "indeterminate";
    }
    return "?";
}

Attribution identify_victim_rp(VictimIdState& state, Address target, VictimIdEnvironment& env)
{
    if (state.candidate_rps.empty()) throw std::invalid_argument("no candidate relying parties");
    Attribution out;
    bool any_invalid = false;
    for (Address candidate : state.candidate_rps) {
        env.serve_inverse_to(candidate);
        env.wait(state.round_wait);
        ++state.rounds;
        const bool r1 = env.reachable(state.a1, target);
        const bool r2 = env.reachable(state.a2, target);
        Measurement m;
        if (!env.path_free_of_rov(state.a1, target) || !env.path_free_of_rov(state.a2, target) || !r2) {
            m = Measurement::invalid;
        } else {
            m = r1 ? Measurement::no_match : Measurement::match;
        }
        state.results[candidate] = m;
        if (m == Measurement::invalid) any_invalid = true;
        if (m == Measurement::match) {
            out.kind = Attribution::Kind::match;
            out.rp = candidate;
            return out;
        }
    }
    out.kind = any_invalid ? Attribution::Kind::indeterminate : Attribution::Kind::no_match;
    return out;
}

} // namespace rpkisim::attack
