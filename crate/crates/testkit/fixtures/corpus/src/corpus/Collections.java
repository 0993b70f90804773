package corpus;

import java.util.ArrayList;
import java.util.HashMap;
import java.util.Iterator;
import java.util.List;
import java.util.Map;

public class Collections {
    static int countLong(List words, int min) {
        int n = 0;
        for (Iterator it = words.iterator(); it.hasNext();) {
            String w = (String) it.next();
            if (w.length() >= min) n++;
        }
        return n;
    }

    static Map histogram(String s) {
        Map m = new HashMap();
        for (int i = 0; i < s.length(); i++) {
            Character c = new Character(s.charAt(i));
            Integer old = (Integer) m.get(c);
            m.put(c, new Integer(old == null ? 1 : old.intValue() + 1));
        }
        return m;
    }

    static List evens(int[] xs) {
        List out = new ArrayList();
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] % 2 == 0) out.add(new Integer(xs[i]));
        }
        return out;
    }

    static String firstOrDefault(List xs, String d) {
        if (xs.isEmpty()) return d;
        return (String) xs.get(0);
    }

    static class Cache {
        private final Map entries = new HashMap();
        private final int capacity;

        Cache(int capacity) {
            this.capacity = capacity;
        }

        Object get(String k) {
            return entries.get(k);
        }

        boolean put(String k, Object v) {
            if (entries.size() >= capacity && !entries.containsKey(k)) {
                return false;
            }
            entries.put(k, v);
            return true;
        }
    }
}
