#include "doctest.h"

#include "ram/errors.hpp"
#include "ram/rs_agent.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

using namespace ram;

namespace {

// Position-weighted additive Q: Q^j = sum_{i<=j} v(a_i) / i. Mutually consistent and order-aware.
double list_value(const std::vector<int>& list, const std::map<int, double>& v) {
    double total = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i) total += v.at(list[i]) / static_cast<double>(i + 1);
    return total;
}

// Exhaustive search over ordered k-tuples.
std::vector<int> brute_force(const std::vector<int>& pool, int k, const std::map<int, double>& v) {
    std::vector<int> best;
    double best_value = -1e300;
    std::vector<int> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<int> tuple;
    std::function<void(std::vector<bool>&)> rec = [&](std::vector<bool>& used) {
        if (static_cast<int>(tuple.size()) == k) {
            const double total = list_value(tuple, v);
            if (total > best_value + 1e-12) {
                best_value = total;
                best = tuple;
            }
            return;
        }
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (used[i]) continue;
            used[i] = true;
            tuple.push_back(pool[i]);
            rec(used);
            tuple.pop_back();
            used[i] = false;
        }
    };
    std::vector<bool> used(pool.size(), false);
    rec(used);
    return best;
}

auto additive_scorer(const std::map<int, double>& v) {
    return [&v](std::span<const int> prefix, std::span<const int> remaining) {
        std::vector<int> list(prefix.begin(), prefix.end());
        std::vector<double> q;
        for (int id : remaining) {
            list.push_back(id);
            q.push_back(list_value(list, v));
            list.pop_back();
        }
        return q;
    };
}

}  // namespace

TEST_CASE("cascade picks (i1, i2) for the additive example") {
    const std::map<int, double> v{{1, 3.0}, {2, 2.0}, {3, 1.0}};
    const std::vector<int> pool{3, 1, 2};
    const auto r = cascade_select(pool, 2, {}, additive_scorer(v));
    CHECK(r.items == std::vector<int>{1, 2});
    CHECK(r.value == 4.0);  // 3 + 2/2
    CHECK(r.items == brute_force(pool, 2, v));
}

TEST_CASE("cascade equals brute force on random additive instances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);  // up to 7
        const int k = 1 + static_cast<int>(rng() % 3);  // up to 3
        std::map<int, double> v;
        std::vector<int> pool;
        for (int i = 0; i < n; ++i) {
            pool.push_back(i * 7 + 1);
            v[i * 7 + 1] = u(rng);
        }
        const auto r = cascade_select(pool, k, {}, additive_scorer(v));
        CHECK(r.items == brute_force(pool, k, v));
        CHECK(r.evaluations <= static_cast<std::size_t>(k * n));
    }
}

TEST_CASE("cascade ties go to the lowest id and exclusions are honoured") {
    const std::map<int, double> v{{5, 1.0}, {2, 1.0}, {9, 1.0}, {4, 7.0}};
    const std::vector<int> pool{5, 9, 2, 4};
    const auto r = cascade_select(pool, 2, {4}, additive_scorer(v));
    CHECK(r.items == std::vector<int>{2, 5});
    CHECK_THROWS_AS(cascade_select(pool, 4, {4}, additive_scorer(v)), EnvironmentError);
}

TEST_CASE("q_value matches recomposition from layer calls") {
    const Catalog cat = test::small_catalog();
    const NetDims dims = test::tiny_dims(3);
    CascadeQNet net(dims, cat.schema(), 21);
    const BrowsingHistory h = test::history_of({1, 2}, {100});
    const EncodedState s = net.encode(cat, h, {1, 1, 0});
    const std::vector<int> prefix{4, 7};
    const auto& store = net.params();
    const auto& emb = net.encoder().embedder;

    Vec hp = Vec::Zero(dims.state_hidden);
    for (int id : prefix) hp = nn::gru_step(store, net.prefix_gru(), hp, embed_item(store, emb, cat, id));
    Vec x(s.values.size() + hp.size() + dims.embed_dim);
    x << s.values, hp, embed_item(store, emb, cat, 9);
    const double expect =
        nn::dense_forward(store, net.layer(2), nn::dense_forward(store, net.layer(1), nn::dense_forward(store, net.layer(0), x)))(0);
    CHECK(net.q_value(s, cat, prefix, 9) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(net.q_value(s, cat, prefix, 9) == net.q_value(s, cat, prefix, 9));

    // empty prefix uses the zero hidden state
    Vec x0(x.size());
    x0 << s.values, Vec::Zero(dims.state_hidden), embed_item(store, emb, cat, 9);
    const double e0 =
        nn::dense_forward(store, net.layer(2), nn::dense_forward(store, net.layer(1), nn::dense_forward(store, net.layer(0), x0)))(0);
    CHECK(net.q_value(s, cat, {}, 9) == doctest::Approx(e0).epsilon(1e-13));

    const std::vector<int> too_long{1, 2, 3};
    CHECK_THROWS_AS(net.q_value(s, cat, too_long, 9), UsageError);
}

TEST_CASE("select_rec_list agrees with a q_value cascade") {
    const Catalog cat = test::small_catalog();
    const NetDims dims = test::tiny_dims(3);
    CascadeQNet net(dims, cat.schema(), 22);
    const EncodedState s = net.encode(cat, test::history_of({0, 3}, {}), {});
    const std::vector<int> cands{0, 1, 2, 3, 4, 5, 6, 7, 8};
    const std::unordered_set<int> exclude{2, 6};
    const auto fast = net.select_rec_list(s, cat, cands, 3, exclude);
    const auto slow = cascade_select(cands, 3, exclude, [&](std::span<const int> prefix, std::span<const int> rem) {
        std::vector<double> q;
        for (int id : rem) q.push_back(net.q_value(s, cat, prefix, id));
        return q;
    });
    CHECK(fast.items == slow.items);
    CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-12));
    CHECK(fast.evaluations <= 3 * cands.size());
    for (int id : fast.items) CHECK(exclude.count(id) == 0);

    const auto one = net.select_rec_list(s, cat, cands, 1);
    int arg = cands[0];
    for (int id : cands) {
        if (net.q_value(s, cat, {}, id) > net.q_value(s, cat, {}, arg)) arg = id;
    }
    CHECK(one.items == std::vector<int>{arg});
}

TEST_CASE("rs targets") {
    CHECK(rs_target(2.5, 10.0, true, 0.95) == 2.5);
    CHECK(rs_target(0.7, 10.0, false, 0.0) == 0.7);
    CHECK(rs_target(0.5, 1.0, false, 0.95) == doctest::Approx(1.45));
}

TEST_CASE("rs update loss for one transition with k = 2 is half the summed squares") {
    const Catalog cat = test::small_catalog();
    const NetDims dims = test::tiny_dims(2);
    RsAgent agent(dims, cat.schema(), 23, nn::OptimizerKind::sgd, 0.0);
    const BrowsingHistory h = test::history_of({3}, {});
    const std::vector<int> list{5, 8};
    const double y = 1.7;
    const auto q = agent.eval().cascade_values(cat, h, {}, list);
    REQUIRE(q.size() == 2);
    const double expect = 0.5 * ((y - q[0]) * (y - q[0]) + (y - q[1]) * (y - q[1]));
    RsSample sample{&h, {}, list, y};
    CHECK(agent.update(cat, std::span<const RsSample>(&sample, 1)) == doctest::Approx(expect).epsilon(1e-13));
    CHECK_THROWS_AS(agent.update(cat, {}), UsageError);
}

TEST_CASE("rs update with exact predictions leaves parameters unchanged") {
    const Catalog cat = test::small_catalog();
    RsAgent agent(test::tiny_dims(2), cat.schema(), 24);
    auto& store = agent.eval().params();
    store.value(agent.eval().layer(2).weight).setZero();
    store.value(agent.eval().layer(2).bias).setConstant(0.9);
    const nn::ParamStore before = store;
    const BrowsingHistory h = test::history_of({1}, {101});
    const std::vector<int> list{2, 4};
    RsSample sample{&h, {}, list, 0.9};
    CHECK(agent.update(cat, std::span<const RsSample>(&sample, 1)) == 0.0);
    CHECK(store.values_equal(before));
}

TEST_CASE("every cascade head regresses to the same target") {
    const Catalog cat = test::small_catalog();
    const NetDims dims = test::tiny_dims(3);
    CascadeQNet net(dims, cat.schema(), 25);
    const BrowsingHistory h = test::history_of({1}, {});
    const std::vector<int> list{2, 4, 6};
    const double y = 0.3;
    const auto q = net.cascade_values(cat, h, {}, list);
    double expect = 0.0;
    for (double v : q) expect += (y - v) * (y - v);
    net.params().zero_grads();
    CHECK(net.accumulate_loss(cat, h, {}, list, y, 1.0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("rs loss gradients match finite differences") {
    const Catalog cat = test::small_catalog();
    const NetDims dims = test::tiny_dims(2);
    CascadeQNet net(dims, cat.schema(), 26);
    std::mt19937_64 rng(26);
    test::jitter(net.params(), rng, 0.3);
    const BrowsingHistory h = test::history_of({1, 7, 3}, {100, 102});
    const std::vector<int> list{5, 8};
    const Context ctx{1, 0, 1};
    const double y = 0.8;
    auto loss = [&] {
        const auto q = net.cascade_values(cat, h, ctx, list);
        return 0.5 * ((y - q[0]) * (y - q[0]) + (y - q[1]) * (y - q[1]));
    };
    net.params().zero_grads();
    net.accumulate_loss(cat, h, ctx, list, y, 0.5);
    const auto check = test::finite_difference(net.params(), loss);
    CHECK_MESSAGE(check.max_rel < 1e-5, check.worst);
    CHECK(check.checked == net.params().scalar_count());
}

TEST_CASE("rs update never touches the target network") {
    const Catalog cat = test::small_catalog();
    RsAgent agent(test::tiny_dims(2), cat.schema(), 27);
    const nn::ParamStore target = agent.target().params();
    CHECK(target.values_equal(agent.eval().params()));
    const BrowsingHistory h = test::history_of({1}, {});
    const std::vector<int> list{2, 3};
    RsSample sample{&h, {}, list, 5.0};
    agent.update(cat, std::span<const RsSample>(&sample, 1));
    CHECK(agent.target().params().values_equal(target));
    CHECK_FALSE(agent.eval().params().values_equal(target));
    agent.sync_target();
    CHECK(agent.target().params().values_equal(agent.eval().params()));
}

TEST_CASE("rs agent checkpoint round trip") {
    const Catalog cat = test::small_catalog();
    RsAgent a(test::tiny_dims(2), cat.schema(), 28);
    const BrowsingHistory h = test::history_of({1}, {});
    const std::vector<int> list{2, 3};
    RsSample sample{&h, {}, list, 5.0};
    a.update(cat, std::span<const RsSample>(&sample, 1));
    std::stringstream ss;
    a.write(ss);
    RsAgent b(test::tiny_dims(2), cat.schema(), 99);
    b.read(ss);
    CHECK(b.eval().params().values_equal(a.eval().params()));
    CHECK(b.target().params().values_equal(a.target().params()));
    a.update(cat, std::span<const RsSample>(&sample, 1));
    b.update(cat, std::span<const RsSample>(&sample, 1));
    CHECK(b.eval().params().values_equal(a.eval().params()));
}
