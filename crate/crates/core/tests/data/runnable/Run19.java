public class Run19 {
    public static void main(String[] args) {
        int acc = 0;
        for (int j = 0; j < 22; j++) {
            acc = acc + j * 6;
        }
        System.out.println(acc);
    }
}
